#include "attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "nes.hpp"

namespace fakebob {

namespace {

// Iterations without a new best loss before the learning rate halves.
constexpr int kStallLimit = 10;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Waveform bim_step(const Waveform& x, const std::vector<double>& grad, double eta,
                  const Waveform& original, double epsilon) {
  Waveform candidate;
  candidate.sample_rate = x.sample_rate;
  candidate.samples.resize(x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i)
    candidate.samples[i] = x.samples[i] - eta * sign_of(grad[i]);
  return clip_eps(candidate, original, epsilon);
}

double result_snr_db(const Waveform& original, const Waveform& adversarial) {
  bool any = false;
  for (std::size_t i = 0; i < original.samples.size(); ++i)
    if (original.samples[i] != adversarial.samples[i]) {
      any = true;
      break;
    }
  if (!any) return std::numeric_limits<double>::quiet_NaN();
  return snr(original, adversarial).snr_db;
}

}  // namespace

void validate_attack_config(const AttackConfig& cfg) {
  require(std::isfinite(cfg.epsilon) && cfg.epsilon >= 0.0, ErrorCategory::invalid_argument,
          "attack config: epsilon must be >= 0");
  require(cfg.kappa >= 0.0, ErrorCategory::invalid_argument, "attack config: kappa must be >= 0");
  require(cfg.m >= 2 && cfg.m % 2 == 0, ErrorCategory::invalid_argument,
          "attack config: m must be even and positive");
  require(cfg.sigma > 0.0, ErrorCategory::invalid_argument, "attack config: sigma must be > 0");
  require(cfg.eta_min > 0.0 && cfg.eta_min <= cfg.eta_max, ErrorCategory::invalid_argument,
          "attack config: need 0 < eta_min <= eta_max");
  require(cfg.max_iter >= 1, ErrorCategory::invalid_argument,
          "attack config: max_iter must be >= 1");
}

AttackResult run_fakebob(const Waveform& original, QueryOracle& oracle, const LossKind& kind,
                         double theta_for_loss, const AttackConfig& cfg, int parallelism) {
  validate_waveform(original);
  validate_attack_config(cfg);

  const std::uint64_t q0 = oracle.queries();
  AttackResult result;
  result.adversarial = original;

  DecisionOutcome outcome = oracle.query(original);
  double loss = eval_loss(kind, outcome.scores, theta_for_loss, cfg.kappa);
  result.loss_trace.push_back(loss);
  if (goal_met(kind, outcome) && loss <= -cfg.kappa) {
    result.success = true;
    result.iterations = 0;
    result.queries = oracle.queries() - q0;
    result.snr_db = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  Rng rng(cfg.seed);
  auto loss_at = [&](const Waveform& probe) {
    DecisionOutcome o = oracle.query(probe);
    return eval_loss(kind, o.scores, theta_for_loss, cfg.kappa);
  };

  Waveform x = original;
  double eta = cfg.eta_max;
  double best_loss = loss;
  int stall = 0;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    std::vector<double> grad = nes_gradient(x, loss_at, cfg.m, cfg.sigma, rng, parallelism);
    x = bim_step(x, grad, eta, original, cfg.epsilon);
    outcome = oracle.query(x);  // decision probe, one per iteration
    loss = eval_loss(kind, outcome.scores, theta_for_loss, cfg.kappa);
    result.loss_trace.push_back(loss);
    result.iterations = iter;
    if (goal_met(kind, outcome) && loss <= -cfg.kappa) {
      result.success = true;
      break;
    }
    if (loss < best_loss) {
      best_loss = loss;
      stall = 0;
    } else if (++stall >= kStallLimit) {
      eta = std::max(eta * 0.5, cfg.eta_min);
      stall = 0;
    }
  }

  result.adversarial = std::move(x);
  result.queries = oracle.queries() - q0;
  result.snr_db = result_snr_db(original, result.adversarial);
  return result;
}

ThresholdEstimate estimate_threshold(QueryOracle& oracle, const Waveform& seed_voice,
                                     const AttackConfig& cfg, int parallelism) {
  validate_waveform(seed_voice);
  validate_attack_config(cfg);

  const std::uint64_t q0 = oracle.queries();
  DecisionOutcome outcome = oracle.query(seed_voice);
  require(outcome.kind == DecisionKind::reject, ErrorCategory::invalid_argument,
          "estimate_threshold: seed voice must be rejected by the oracle");

  double theta_cand = outcome.max_score();
  const double delta = std::fabs(theta_cand / 10.0);  // search step, fixed at initialization
  Waveform x = seed_voice;
  Rng rng(cfg.seed);

  double last_max_score = theta_cand;
  auto loss_at = [&](const Waveform& probe) {
    DecisionOutcome o = oracle.query(probe);
    return loss_osi_untargeted(o.scores, theta_cand, cfg.kappa);
  };

  const int kOuterCap = 100;
  for (int outer = 0; outer < kOuterCap; ++outer) {
    theta_cand += delta;
    for (int step = 0; step < cfg.max_iter; ++step) {
      std::vector<double> grad = nes_gradient(x, loss_at, cfg.m, cfg.sigma, rng, parallelism);
      x = bim_step(x, grad, cfg.eta_max, seed_voice, cfg.epsilon);
      outcome = oracle.query(x);
      last_max_score = outcome.max_score();
      if (outcome.kind != DecisionKind::reject) {
        ThresholdEstimate est;
        est.theta_hat = last_max_score;
        est.queries = oracle.queries() - q0;
        est.probe = std::move(x);
        return est;
      }
      if (last_max_score >= theta_cand) break;
    }
    if (last_max_score < theta_cand)
      fail(ErrorCategory::budget,
           "estimate_threshold: BIM step budget exhausted before reaching the candidate");
  }
  fail(ErrorCategory::budget, "estimate_threshold: outer iteration cap exceeded");
}

}  // namespace fakebob
