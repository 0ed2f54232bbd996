#pragma once

#include <optional>
#include <vector>

#include "recognizer.hpp"

namespace fakebob {

struct MetricCell {
  long num = 0;
  long den = 0;
  bool present() const { return den > 0; }
  double value() const;  // errors when den == 0
};

// Fractions carry their integer numerators/denominators; absent cells stay
// absent rather than reading as zero. Campaign-level means are filled by the
// campaign runner, not by compute_metrics.
struct MetricsReport {
  MetricCell asr;       // adversarial voices recognized as the target
  MetricCell utr;       // adversarial voices not rejected (OSI/SV) or
                        // not recognized as the source (CSI)
  MetricCell far;       // imposter voices accepted
  MetricCell frr;       // enrolled voices rejected
  MetricCell osier;     // enrolled voices accepted as the wrong speaker
  MetricCell accuracy;  // CSI correct classification
  std::optional<double> mean_snr_db;
  std::optional<double> mean_iterations;
  std::optional<double> mean_queries;
  std::optional<double> mean_time_s;
};

struct LabeledOutcome {
  Task task = Task::osi;
  bool adversarial = false;
  std::optional<int> true_speaker;  // enrolled index for genuine voices
  std::optional<int> target;        // targeted-attack goal
  std::optional<int> source;        // source speaker for CSI untargeted
  DecisionOutcome outcome;
};

MetricsReport compute_metrics(const std::vector<LabeledOutcome>& outcomes);

}  // namespace fakebob
