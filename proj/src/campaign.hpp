#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "defenses.hpp"
#include "metrics.hpp"
#include "records.hpp"
#include "recognizer.hpp"
#include "synth.hpp"

namespace fakebob {

// Everything the campaigns need, built deterministically from one config:
// UBM, MAP-adapted speakers, per-task recognizers and the corpus partitions.
struct DeskSystem {
  FeatureConfig feature;
  DiagGmm ubm;
  std::vector<SpeakerModel> enrolled_models;
  std::vector<int> enrolled_corpus_index;  // corpus speaker index per enrolled position
  std::optional<Recognizer> osi;
  std::optional<Recognizer> csi;
  std::vector<Recognizer> sv;  // one singleton system per enrolled speaker
  std::vector<LabeledUtterance> enrolled_test;  // held-out voices of enrolled speakers
  std::vector<LabeledUtterance> imposter_calib;
  std::vector<LabeledUtterance> imposter_eval;
  std::vector<double> em_loglike_trace;

  const Recognizer& recognizer_for(Task task, int target_enrolled_index) const;
};

DeskSystem build_desk_system(const ExperimentConfig& cfg, int components_override = 0);

// Pipeline pieces for the staged CLI flow (train -> enroll -> calibrate).
DiagGmm train_ubm_from_config(const ExperimentConfig& cfg, std::vector<double>* loglike_trace = nullptr);
std::vector<SpeakerModel> enroll_from_config(const ExperimentConfig& cfg, const DiagGmm& ubm);
std::vector<Waveform> calibration_voices(const ExperimentConfig& cfg);

struct CampaignOutcome {
  std::vector<TrialRecord> records;
  MetricsReport overall;
  MetricsReport intra;
  MetricsReport inter;
  nlohmann::json report;  // flat summary for the CLI / C API
};

// Targeted attack campaign for one task: a deterministic 50/50 intra/inter
// grid of (source voice, target speaker) pairs, trials run in parallel,
// records written in trial order. Empty out_dir skips persistence.
CampaignOutcome run_effectiveness_campaign(const ExperimentConfig& cfg, Task task,
                                           const std::string& out_dir,
                                           const DeskSystem* prebuilt = nullptr);

// One campaign per epsilon; rows ordered as given.
nlohmann::json run_epsilon_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

// Re-scores persisted adversarial voices against a different recognizer.
// Transfer rates are computed over the voices that succeeded on the source.
MetricsReport run_transfer_evaluation(const std::vector<TrialRecord>& records,
                                      const std::string& wav_dir, const Recognizer& target);
nlohmann::json run_transfer_evaluation_json(const std::string& records_dir,
                                            const Recognizer& target);

// Craft-on-source / evaluate-on-target table across the kappa grid.
nlohmann::json run_kappa_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

// Defense evaluations per the S1/S2 settings.
nlohmann::json run_defense_evaluation(const ExperimentConfig& cfg, const std::string& mode,
                                      const std::string& out_dir);

// Benign performance of the configured recognizers (accuracy / FAR / FRR /
// OSIER) on the held-out corpus partitions.
nlohmann::json run_benign_evaluation(const ExperimentConfig& cfg, const DeskSystem* prebuilt = nullptr);

// Recomputes the aggregate report from a persisted record log.
nlohmann::json report_from_records(const std::string& records_dir);

// Materializes the configured corpus as WAV files plus a manifest.
void write_corpus_dir(const ExperimentConfig& cfg, const std::string& out_dir);

// Re-runs one persisted trial; used by the determinism checks and the CLI.
AttackResult replay_trial(const ExperimentConfig& cfg, const DeskSystem& system,
                          const TrialRecord& record);

nlohmann::json metrics_to_json(const MetricsReport& m);

// Derived seed for trial `index` of a named campaign; pure in (master, salt, index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t salt, std::uint64_t index);

}  // namespace fakebob
