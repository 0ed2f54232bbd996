#include "recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "error.hpp"

namespace fakebob {

using nlohmann::json;

namespace {
constexpr int kModelFormatVersion = 1;
}

const char* task_name(Task t) {
  switch (t) {
    case Task::osi: return "osi";
    case Task::csi: return "csi";
    case Task::sv: return "sv";
  }
  return "osi";
}

Task task_from_name(const std::string& name) {
  if (name == "osi" || name == "OSI") return Task::osi;
  if (name == "csi" || name == "CSI") return Task::csi;
  if (name == "sv" || name == "SV") return Task::sv;
  fail(ErrorCategory::parse, "unknown task: " + name);
}

double DecisionOutcome::max_score() const {
  require(!scores.empty(), ErrorCategory::state, "outcome has no scores");
  return *std::max_element(scores.begin(), scores.end());
}

Recognizer::Recognizer(Task task, FeatureConfig feature_config, DiagGmm ubm,
                       std::vector<SpeakerModel> speakers, std::optional<double> threshold)
    : task_(task),
      feature_config_(feature_config),
      ubm_(std::move(ubm)),
      speakers_(std::move(speakers)),
      threshold_(threshold) {
  validate_feature_config(feature_config_);
  validate_gmm(ubm_);
  for (const auto& s : speakers_) {
    require(s.gmm.num_components == ubm_.num_components && s.gmm.dim == ubm_.dim,
            ErrorCategory::invalid_argument,
            "speaker model shape does not match the UBM");
  }
  ubm_scorer_ = std::make_shared<GmmScorer>(ubm_);
  speaker_scorers_.reserve(speakers_.size());
  for (const auto& s : speakers_) speaker_scorers_.push_back(std::make_shared<GmmScorer>(s.gmm));
}

int Recognizer::speaker_index(const std::string& speaker_id) const {
  for (std::size_t i = 0; i < speakers_.size(); ++i)
    if (speakers_[i].speaker_id == speaker_id) return static_cast<int>(i);
  return -1;
}

void Recognizer::check_scorable() const {
  require(!speakers_.empty(), ErrorCategory::state, "recognizer has no enrolled speakers");
  switch (task_) {
    case Task::sv:
      require(speakers_.size() == 1, ErrorCategory::state,
              "SV recognizer must have exactly one enrolled speaker");
      break;
    case Task::csi:
      require(speakers_.size() >= 2, ErrorCategory::state,
              "CSI recognizer needs at least two enrolled speakers");
      break;
    case Task::osi:
      break;
  }
}

std::vector<double> Recognizer::score(const Waveform& w) const {
  check_scorable();
  FeatureMatrix feats = extract_features(w, feature_config_);
  const int n = num_speakers();
  std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
  std::size_t voiced = 0;
  for (int t = 0; t < feats.num_frames; ++t) {
    if (!feats.voiced_mask[static_cast<std::size_t>(t)]) continue;
    ++voiced;
    const double* x = feats.row(t);
    double ubm_ll = ubm_scorer_->frame_loglike(x);
    for (int i = 0; i < n; ++i)
      sums[static_cast<std::size_t>(i)] += speaker_scorers_[static_cast<std::size_t>(i)]->frame_loglike(x) - ubm_ll;
  }
  require(voiced >= 1, ErrorCategory::data, "no voiced frames to score");
  for (double& s : sums) s /= static_cast<double>(voiced);
  return sums;
}

DecisionOutcome Recognizer::decide(const Waveform& w) const {
  DecisionOutcome out;
  out.scores = score(w);
  int best = 0;
  for (int i = 1; i < static_cast<int>(out.scores.size()); ++i)
    if (out.scores[static_cast<std::size_t>(i)] > out.scores[static_cast<std::size_t>(best)])
      best = i;  // strict >, so ties keep the lowest index
  switch (task_) {
    case Task::csi:
      out.kind = DecisionKind::speaker;
      out.speaker_index = best;
      break;
    case Task::osi: {
      require(threshold_.has_value(), ErrorCategory::state,
              "OSI recognizer has no calibrated threshold");
      if (out.scores[static_cast<std::size_t>(best)] >= *threshold_) {
        out.kind = DecisionKind::speaker;
        out.speaker_index = best;
      } else {
        out.kind = DecisionKind::reject;
      }
      break;
    }
    case Task::sv: {
      require(threshold_.has_value(), ErrorCategory::state,
              "SV recognizer has no calibrated threshold");
      out.kind = out.scores[0] >= *threshold_ ? DecisionKind::accept : DecisionKind::reject;
      break;
    }
  }
  return out;
}

Recognizer Recognizer::with_threshold(double theta) const {
  return Recognizer(task_, feature_config_, ubm_, speakers_, theta);
}

Recognizer Recognizer::with_task(Task task) const {
  std::optional<double> theta = task == Task::csi ? std::nullopt : threshold_;
  return Recognizer(task, feature_config_, ubm_, speakers_, theta);
}

namespace {

json gmm_to_json(const DiagGmm& g) {
  return json{{"num_components", g.num_components},
              {"dim", g.dim},
              {"weights", g.weights},
              {"means", g.means},
              {"variances", g.variances}};
}

DiagGmm gmm_from_json(const json& j) {
  DiagGmm g;
  g.num_components = j.at("num_components").get<int>();
  g.dim = j.at("dim").get<int>();
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<double>>();
  g.variances = j.at("variances").get<std::vector<double>>();
  validate_gmm(g);
  return g;
}

json feature_config_to_json(const FeatureConfig& c) {
  return json{{"frame_len_ms", c.frame_len_ms},
              {"frame_step_ms", c.frame_step_ms},
              {"preemphasis", c.preemphasis},
              {"n_mels", c.n_mels},
              {"n_ceps", c.n_ceps},
              {"delta_window", c.delta_window},
              {"vad_energy_ratio", c.vad_energy_ratio}};
}

FeatureConfig feature_config_from_json(const json& j) {
  FeatureConfig c;
  c.frame_len_ms = j.value("frame_len_ms", c.frame_len_ms);
  c.frame_step_ms = j.value("frame_step_ms", c.frame_step_ms);
  c.preemphasis = j.value("preemphasis", c.preemphasis);
  c.n_mels = j.value("n_mels", c.n_mels);
  c.n_ceps = j.value("n_ceps", c.n_ceps);
  c.delta_window = j.value("delta_window", c.delta_window);
  c.vad_energy_ratio = j.value("vad_energy_ratio", c.vad_energy_ratio);
  validate_feature_config(c);
  return c;
}

}  // namespace

void Recognizer::save(const std::string& path) const {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "fakebob-recognizer";
  j["task"] = task_name(task_);
  j["feature_config"] = feature_config_to_json(feature_config_);
  j["ubm"] = gmm_to_json(ubm_);
  json spk = json::array();
  for (const auto& s : speakers_) spk.push_back(json{{"id", s.speaker_id}, {"gmm", gmm_to_json(s.gmm)}});
  j["speakers"] = spk;
  if (threshold_.has_value())
    j["threshold"] = *threshold_;
  else
    j["threshold"] = nullptr;
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  require(out.good(), ErrorCategory::io, "failed writing " + path);
}

Recognizer Recognizer::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCategory::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  require(j.value("kind", "") == "fakebob-recognizer", ErrorCategory::parse,
          "not a recognizer model file");
  int version = j.value("format_version", -1);
  require(version == kModelFormatVersion, ErrorCategory::parse,
          "unsupported model format version " + std::to_string(version));
  Task task = task_from_name(j.at("task").get<std::string>());
  FeatureConfig fc = feature_config_from_json(j.at("feature_config"));
  DiagGmm ubm = gmm_from_json(j.at("ubm"));
  std::vector<SpeakerModel> speakers;
  for (const auto& s : j.at("speakers")) {
    SpeakerModel m;
    m.speaker_id = s.at("id").get<std::string>();
    m.gmm = gmm_from_json(s.at("gmm"));
    speakers.push_back(std::move(m));
  }
  std::optional<double> theta;
  if (j.contains("threshold") && !j.at("threshold").is_null())
    theta = j.at("threshold").get<double>();
  return Recognizer(task, fc, std::move(ubm), std::move(speakers), theta);
}

double calibrate_threshold(const Recognizer& rec, const std::vector<Waveform>& imposter_voices,
                           double target_far) {
  require(rec.task() != Task::csi, ErrorCategory::invalid_argument,
          "CSI has no threshold to calibrate");
  require(target_far >= 0.0 && target_far < 1.0, ErrorCategory::invalid_argument,
          "target_far must be in [0, 1)");
  require(imposter_voices.size() >= 20, ErrorCategory::data,
          "need at least 20 imposter voices to calibrate");
  std::vector<double> max_scores;
  max_scores.reserve(imposter_voices.size());
  for (const auto& v : imposter_voices) {
    auto s = rec.score(v);
    max_scores.push_back(*std::max_element(s.begin(), s.end()));
  }
  std::sort(max_scores.begin(), max_scores.end(), std::greater<double>());
  std::size_t n = max_scores.size();
  std::size_t k = static_cast<std::size_t>(std::floor(target_far * static_cast<double>(n) + 1e-12));
  if (k == 0) {
    // Reject every calibration imposter: theta strictly above the top score.
    return std::nextafter(max_scores[0], std::numeric_limits<double>::infinity());
  }
  return max_scores[k - 1];
}

}  // namespace fakebob
