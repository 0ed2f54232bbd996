#pragma once

#include <span>
#include <string>
#include <variant>

#include "recognizer.hpp"

namespace fakebob {

// Attack goals. Indices refer to positions in the recognizer's speaker list.
struct OsiTargeted {
  int target = 0;
};
struct OsiUntargeted {};
struct CsiTargeted {
  int target = 0;
};
struct CsiUntargeted {
  int source = 0;  // true speaker of the original voice
};
struct SvTargeted {};

using LossKind = std::variant<OsiTargeted, OsiUntargeted, CsiTargeted, CsiUntargeted, SvTargeted>;

// max{ max{theta, max_{i != t} s_i} - s_t, -kappa }
double loss_osi_targeted(std::span<const double> scores, double theta, int target, double kappa);

// max{ theta - max_i s_i, -kappa }
double loss_osi_untargeted(std::span<const double> scores, double theta, double kappa);

// max{ max_{i != t} s_i - s_t, -kappa }
double loss_csi_targeted(std::span<const double> scores, int target, double kappa);

// max{ s_source - max_{i != source} s_i, -kappa }
double loss_csi_untargeted(std::span<const double> scores, int source, double kappa);

// max{ theta - score, -kappa }
double loss_sv(double score, double theta, double kappa);

double eval_loss(const LossKind& kind, std::span<const double> scores, double theta, double kappa);

// Whether the oracle decision satisfies the attack goal.
bool goal_met(const LossKind& kind, const DecisionOutcome& outcome);

std::string loss_kind_name(const LossKind& kind);
int loss_kind_speaker_arg(const LossKind& kind);  // target/source index, -1 when none
LossKind make_loss_kind(const std::string& name, int speaker_arg);

}  // namespace fakebob
