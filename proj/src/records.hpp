#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "attack.hpp"

namespace fakebob {

// One attack trial, self-sufficient for a deterministic re-run given the
// campaign's experiment config.
struct TrialRecord {
  int trial = 0;
  std::string task;    // osi|csi|sv
  std::string method;  // nes|pso
  std::string loss_kind;
  int loss_speaker_arg = -1;
  std::string scenario;  // intra|inter
  int source_speaker_index = -1;
  std::string source_speaker_id;
  int source_utt = -1;
  int source_enrolled_index = -1;  // enrolled slot of the source, -1 for imposters
  int target_enrolled_index = -1;
  std::string target_speaker_id;
  double theta_for_loss = 0.0;
  AttackConfig attack;  // carries the derived per-trial seed
  bool success = false;
  int iterations = 0;
  std::uint64_t queries = 0;
  double snr_db = 0.0;  // NaN when undefined, persisted as null
  double final_loss = 0.0;
  std::string decision;  // reject|accept|speaker
  int decision_speaker = -1;
  std::string wav;  // adversarial file name relative to the record log
  double wall_s = 0.0;
};

nlohmann::json trial_record_to_json(const TrialRecord& r);
TrialRecord trial_record_from_json(const nlohmann::json& j);

// Append-only JSONL log, one record per line in trial order.
void write_records(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_records(const std::string& path);

// Flat tab-separated summary, one row per trial.
void write_summary_tsv(const std::vector<TrialRecord>& records, const std::string& path);

}  // namespace fakebob
