#include "records.hpp"

#include <cmath>
#include <fstream>

#include "config.hpp"
#include "error.hpp"

namespace fakebob {

using nlohmann::json;

namespace {
constexpr int kRecordVersion = 1;
}

json trial_record_to_json(const TrialRecord& r) {
  json j;
  j["record_version"] = kRecordVersion;
  j["trial"] = r.trial;
  j["task"] = r.task;
  j["method"] = r.method;
  j["loss_kind"] = r.loss_kind;
  j["loss_speaker_arg"] = r.loss_speaker_arg;
  j["scenario"] = r.scenario;
  j["source_speaker_index"] = r.source_speaker_index;
  j["source_speaker_id"] = r.source_speaker_id;
  j["source_utt"] = r.source_utt;
  j["source_enrolled_index"] = r.source_enrolled_index;
  j["target_enrolled_index"] = r.target_enrolled_index;
  j["target_speaker_id"] = r.target_speaker_id;
  j["theta_for_loss"] = r.theta_for_loss;
  j["attack_config"] = attack_config_to_json(r.attack);
  j["success"] = r.success;
  j["iterations"] = r.iterations;
  j["queries"] = r.queries;
  if (std::isnan(r.snr_db))
    j["snr_db"] = nullptr;
  else
    j["snr_db"] = r.snr_db;
  j["final_loss"] = r.final_loss;
  j["decision"] = r.decision;
  j["decision_speaker"] = r.decision_speaker;
  j["wav"] = r.wav;
  j["wall_s"] = r.wall_s;
  return j;
}

TrialRecord trial_record_from_json(const json& j) {
  int version = j.value("record_version", -1);
  require(version == kRecordVersion, ErrorCategory::parse,
          "unsupported record_version " + std::to_string(version));
  TrialRecord r;
  r.trial = j.at("trial").get<int>();
  r.task = j.at("task").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.loss_kind = j.at("loss_kind").get<std::string>();
  r.loss_speaker_arg = j.at("loss_speaker_arg").get<int>();
  r.scenario = j.at("scenario").get<std::string>();
  r.source_speaker_index = j.at("source_speaker_index").get<int>();
  r.source_speaker_id = j.at("source_speaker_id").get<std::string>();
  r.source_utt = j.at("source_utt").get<int>();
  r.source_enrolled_index = j.value("source_enrolled_index", -1);
  r.target_enrolled_index = j.at("target_enrolled_index").get<int>();
  r.target_speaker_id = j.at("target_speaker_id").get<std::string>();
  r.theta_for_loss = j.at("theta_for_loss").get<double>();
  r.attack = attack_config_from_json(j.at("attack_config"));
  r.success = j.at("success").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.queries = j.at("queries").get<std::uint64_t>();
  r.snr_db = j.at("snr_db").is_null() ? std::nan("") : j.at("snr_db").get<double>();
  r.final_loss = j.at("final_loss").get<double>();
  r.decision = j.at("decision").get<std::string>();
  r.decision_speaker = j.at("decision_speaker").get<int>();
  r.wav = j.at("wav").get<std::string>();
  r.wall_s = j.at("wall_s").get<double>();
  return r;
}

void write_records(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open " + path + " for writing");
  for (const auto& r : records) out << trial_record_to_json(r).dump() << "\n";
  require(out.good(), ErrorCategory::io, "failed writing " + path);
}

std::vector<TrialRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open record log " + path);
  std::vector<TrialRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(trial_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorCategory::parse,
           "bad record at " + path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_summary_tsv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open " + path + " for writing");
  out << "trial\ttask\tmethod\tscenario\tsource\tsource_utt\ttarget\tsuccess\titerations\t"
         "queries\tsnr_db\tfinal_loss\tdecision\twall_s\n";
  for (const auto& r : records) {
    out << r.trial << "\t" << r.task << "\t" << r.method << "\t" << r.scenario << "\t"
        << r.source_speaker_id << "\t" << r.source_utt << "\t" << r.target_speaker_id << "\t"
        << (r.success ? 1 : 0) << "\t" << r.iterations << "\t" << r.queries << "\t";
    if (std::isnan(r.snr_db))
      out << "NA";
    else
      out << r.snr_db;
    out << "\t" << r.final_loss << "\t" << r.decision << "\t" << r.wall_s << "\n";
  }
  require(out.good(), ErrorCategory::io, "failed writing " + path);
}

}  // namespace fakebob
