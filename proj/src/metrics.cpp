#include "metrics.hpp"

#include "error.hpp"

namespace fakebob {

double MetricCell::value() const {
  require(den > 0, ErrorCategory::data, "metric has an empty applicable subset");
  return static_cast<double>(num) / static_cast<double>(den);
}

MetricsReport compute_metrics(const std::vector<LabeledOutcome>& outcomes) {
  MetricsReport r;
  for (const auto& o : outcomes) {
    const auto& d = o.outcome;
    if (o.adversarial) {
      // ASR: recognized as the target speaker (accept for SV).
      if (o.target.has_value() || o.task == Task::sv) {
        ++r.asr.den;
        bool hit = o.task == Task::sv
                       ? d.kind == DecisionKind::accept
                       : d.kind == DecisionKind::speaker && d.speaker_index == *o.target;
        if (hit) ++r.asr.num;
      }
      // UTR per task.
      ++r.utr.den;
      bool untargeted_hit = false;
      switch (o.task) {
        case Task::osi:
          untargeted_hit = d.kind != DecisionKind::reject;
          break;
        case Task::sv:
          untargeted_hit = d.kind == DecisionKind::accept;
          break;
        case Task::csi:
          require(o.source.has_value(), ErrorCategory::invalid_argument,
                  "CSI adversarial outcome needs a source speaker for UTR");
          untargeted_hit = !(d.kind == DecisionKind::speaker && d.speaker_index == *o.source);
          break;
      }
      if (untargeted_hit) ++r.utr.num;
      continue;
    }

    // Benign voices.
    if (!o.true_speaker.has_value()) {
      // Imposter: acceptance is a false accept (OSI and SV only).
      if (o.task != Task::csi) {
        ++r.far.den;
        if (d.kind != DecisionKind::reject) ++r.far.num;
      }
      continue;
    }
    switch (o.task) {
      case Task::csi:
        ++r.accuracy.den;
        if (d.kind == DecisionKind::speaker && d.speaker_index == *o.true_speaker)
          ++r.accuracy.num;
        break;
      case Task::sv:
        ++r.frr.den;
        if (d.kind == DecisionKind::reject) ++r.frr.num;
        break;
      case Task::osi:
        ++r.frr.den;
        if (d.kind == DecisionKind::reject) ++r.frr.num;
        ++r.osier.den;
        if (d.kind == DecisionKind::speaker && d.speaker_index != *o.true_speaker) ++r.osier.num;
        break;
    }
  }
  return r;
}

}  // namespace fakebob
