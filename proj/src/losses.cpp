#include "losses.hpp"

#include <algorithm>
#include <limits>

#include "error.hpp"

namespace fakebob {

namespace {

double max_excluding(std::span<const double> scores, int excluded) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(scores.size()); ++i)
    if (i != excluded) m = std::max(m, scores[static_cast<std::size_t>(i)]);
  return m;
}

void check_index(std::span<const double> scores, int idx, const char* what) {
  require(idx >= 0 && idx < static_cast<int>(scores.size()), ErrorCategory::invalid_argument,
          std::string(what) + " index out of range");
}

}  // namespace

double loss_osi_targeted(std::span<const double> scores, double theta, int target, double kappa) {
  require(!scores.empty(), ErrorCategory::invalid_argument, "loss: empty score vector");
  check_index(scores, target, "target");
  double rival = std::max(theta, max_excluding(scores, target));
  return std::max(rival - scores[static_cast<std::size_t>(target)], -kappa);
}

double loss_osi_untargeted(std::span<const double> scores, double theta, double kappa) {
  require(!scores.empty(), ErrorCategory::invalid_argument, "loss: empty score vector");
  double best = *std::max_element(scores.begin(), scores.end());
  return std::max(theta - best, -kappa);
}

double loss_csi_targeted(std::span<const double> scores, int target, double kappa) {
  require(scores.size() >= 2, ErrorCategory::invalid_argument,
          "CSI loss needs at least two speakers");
  check_index(scores, target, "target");
  return std::max(max_excluding(scores, target) - scores[static_cast<std::size_t>(target)], -kappa);
}

double loss_csi_untargeted(std::span<const double> scores, int source, double kappa) {
  require(scores.size() >= 2, ErrorCategory::invalid_argument,
          "CSI loss needs at least two speakers");
  check_index(scores, source, "source");
  return std::max(scores[static_cast<std::size_t>(source)] - max_excluding(scores, source), -kappa);
}

double loss_sv(double score, double theta, double kappa) {
  return std::max(theta - score, -kappa);
}

double eval_loss(const LossKind& kind, std::span<const double> scores, double theta, double kappa) {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, OsiTargeted>)
          return loss_osi_targeted(scores, theta, k.target, kappa);
        else if constexpr (std::is_same_v<T, OsiUntargeted>)
          return loss_osi_untargeted(scores, theta, kappa);
        else if constexpr (std::is_same_v<T, CsiTargeted>)
          return loss_csi_targeted(scores, k.target, kappa);
        else if constexpr (std::is_same_v<T, CsiUntargeted>)
          return loss_csi_untargeted(scores, k.source, kappa);
        else {
          require(!scores.empty(), ErrorCategory::invalid_argument, "loss: empty score vector");
          return loss_sv(scores[0], theta, kappa);
        }
      },
      kind);
}

bool goal_met(const LossKind& kind, const DecisionOutcome& outcome) {
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, OsiTargeted>)
          return outcome.kind == DecisionKind::speaker && outcome.speaker_index == k.target;
        else if constexpr (std::is_same_v<T, OsiUntargeted>)
          return outcome.kind != DecisionKind::reject;
        else if constexpr (std::is_same_v<T, CsiTargeted>)
          return outcome.kind == DecisionKind::speaker && outcome.speaker_index == k.target;
        else if constexpr (std::is_same_v<T, CsiUntargeted>)
          return outcome.kind == DecisionKind::speaker && outcome.speaker_index != k.source;
        else
          return outcome.kind == DecisionKind::accept;
      },
      kind);
}

std::string loss_kind_name(const LossKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, OsiTargeted>) return "osi_targeted";
        else if constexpr (std::is_same_v<T, OsiUntargeted>) return "osi_untargeted";
        else if constexpr (std::is_same_v<T, CsiTargeted>) return "csi_targeted";
        else if constexpr (std::is_same_v<T, CsiUntargeted>) return "csi_untargeted";
        else return "sv_targeted";
      },
      kind);
}

int loss_kind_speaker_arg(const LossKind& kind) {
  return std::visit(
      [](const auto& k) -> int {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, OsiTargeted>) return k.target;
        else if constexpr (std::is_same_v<T, CsiTargeted>) return k.target;
        else if constexpr (std::is_same_v<T, CsiUntargeted>) return k.source;
        else return -1;
      },
      kind);
}

LossKind make_loss_kind(const std::string& name, int speaker_arg) {
  if (name == "osi_targeted") return OsiTargeted{speaker_arg};
  if (name == "osi_untargeted") return OsiUntargeted{};
  if (name == "csi_targeted") return CsiTargeted{speaker_arg};
  if (name == "csi_untargeted") return CsiUntargeted{speaker_arg};
  if (name == "sv_targeted") return SvTargeted{};
  fail(ErrorCategory::parse, "unknown loss kind: " + name);
}

}  // namespace fakebob
