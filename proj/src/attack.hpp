#pragma once

#include <cstdint>
#include <vector>

#include "audio.hpp"
#include "losses.hpp"
#include "oracle.hpp"

namespace fakebob {

struct AttackConfig {
  double epsilon = 0.002;  // L-inf budget
  double kappa = 0.0;      // confidence margin
  int m = 50;              // NES samples per draw, even
  double sigma = 1e-3;     // NES search variance
  double eta_max = 1e-3;
  double eta_min = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = 0;
};

void validate_attack_config(const AttackConfig& cfg);

struct AttackResult {
  Waveform adversarial;
  bool success = false;
  int iterations = 0;
  std::uint64_t queries = 0;
  double snr_db = 0.0;  // NaN when the adversarial voice equals the original
  std::vector<double> loss_trace;
};

// Sign-BIM under clip_{x,eps} driven by NES gradients of the task loss.
// Success requires the oracle decision to meet the goal AND the loss to reach
// -kappa. The learning rate starts at eta_max and halves after 10 iterations
// without improving the best loss, never below eta_min.
AttackResult run_fakebob(const Waveform& original, QueryOracle& oracle, const LossKind& kind,
                         double theta_for_loss, const AttackConfig& cfg, int parallelism = 1);

struct ThresholdEstimate {
  double theta_hat = 0.0;
  std::uint64_t queries = 0;
  Waveform probe;  // accepted probe whose max score equals theta_hat
};

// Iterative-deepening threshold search: raise a candidate threshold by
// Delta = |initial/10| and push the seed voice's max score toward it with
// BIM+NES until the oracle accepts; the accepted probe's max score is the
// estimate (an upper bound on the true threshold). Works for OSI and SV
// oracles; the SV loss is the singleton case of the OSI untargeted loss.
ThresholdEstimate estimate_threshold(QueryOracle& oracle, const Waveform& seed_voice,
                                     const AttackConfig& cfg, int parallelism = 1);

}  // namespace fakebob
