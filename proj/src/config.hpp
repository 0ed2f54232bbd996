#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "defenses_spec.hpp"
#include "features.hpp"
#include "pso.hpp"
#include "synth.hpp"

namespace fakebob {

// Desk-scale corpus layout. One generator run covers all roles: the first
// n_background speaker indices train the UBM, the next n_enrolled are the
// recognizer's speaker group, the rest are imposters. Utterance indices
// [0, utts_enroll) enroll, [utts_enroll, utts_enroll+utts_test) are held out.
struct CorpusSpec {
  int n_background = 20;
  int n_enrolled = 5;
  int n_imposters = 12;
  int utts_background = 5;
  int utts_enroll = 3;
  int utts_test = 4;
  double duration_s = 0.7;
  int sample_rate = 16000;
  std::optional<std::string> wav_dir;  // load WAVs + manifest instead of synthesizing
};

struct RecognizerSpec {
  std::string task = "osi";
  int components = 64;
  int em_iters = 8;
  double relevance = 16.0;
  double target_far = 0.10;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  CorpusSpec corpus;
  RecognizerSpec recognizer;
  FeatureConfig feature;
  AttackConfig attack;
  PsoConfig pso;
  std::optional<DefenseSpec> defense;
  std::vector<double> sweep_epsilons;
  std::vector<double> sweep_kappas;
  int transfer_components = 32;  // second system for transfer experiments
  int trials = 50;
  int parallelism = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

nlohmann::json attack_config_to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const nlohmann::json& j);
nlohmann::json pso_config_to_json(const PsoConfig& cfg);
PsoConfig pso_config_from_json(const nlohmann::json& j);
nlohmann::json defense_spec_to_json(const DefenseSpec& spec);
DefenseSpec defense_spec_from_json(const nlohmann::json& j);

// FAKEBOB_OUT_DIR and FAKEBOB_PARALLELISM are the only environment overrides.
void apply_env_overrides(ExperimentConfig& cfg);

int effective_parallelism(const ExperimentConfig& cfg);

}  // namespace fakebob
