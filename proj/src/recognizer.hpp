#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "audio.hpp"
#include "features.hpp"
#include "gmm.hpp"

namespace fakebob {

enum class Task { osi, csi, sv };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

enum class DecisionKind { speaker, reject, accept };

struct DecisionOutcome {
  std::vector<double> scores;  // one per enrolled speaker
  DecisionKind kind = DecisionKind::reject;
  int speaker_index = -1;  // valid when kind == speaker

  double max_score() const;
};

// Immutable GMM-UBM recognizer for one task. Scoring is the frame-averaged
// log-likelihood ratio against the UBM over voiced frames; read-only and
// safe for concurrent queries.
class Recognizer {
 public:
  Recognizer(Task task, FeatureConfig feature_config, DiagGmm ubm,
             std::vector<SpeakerModel> speakers, std::optional<double> threshold);

  Task task() const { return task_; }
  const FeatureConfig& feature_config() const { return feature_config_; }
  const DiagGmm& ubm() const { return ubm_; }
  const std::vector<SpeakerModel>& speakers() const { return speakers_; }
  std::optional<double> threshold() const { return threshold_; }
  int num_speakers() const { return static_cast<int>(speakers_.size()); }
  int speaker_index(const std::string& speaker_id) const;  // -1 when absent

  // [S(w)]_i = mean over voiced frames of (log p_i(frame) - log p_ubm(frame)).
  std::vector<double> score(const Waveform& w) const;

  // OSI: argmax if max >= theta else reject; CSI: argmax; SV: accept iff
  // score >= theta. Ties break to the lowest speaker index.
  DecisionOutcome decide(const Waveform& w) const;

  // Copy with a different threshold (models are immutable).
  Recognizer with_threshold(double theta) const;
  Recognizer with_task(Task task) const;

  void save(const std::string& path) const;
  static Recognizer load(const std::string& path);

 private:
  void check_scorable() const;

  Task task_;
  FeatureConfig feature_config_;
  DiagGmm ubm_;
  std::vector<SpeakerModel> speakers_;
  std::optional<double> threshold_;
  std::shared_ptr<const GmmScorer> ubm_scorer_;
  std::vector<std::shared_ptr<const GmmScorer>> speaker_scorers_;
};

// theta at the empirical (1 - target_far) quantile of imposter max-scores.
// target_far in [0, 1); 0 places theta strictly above every imposter score.
double calibrate_threshold(const Recognizer& rec, const std::vector<Waveform>& imposter_voices,
                           double target_far);

}  // namespace fakebob
