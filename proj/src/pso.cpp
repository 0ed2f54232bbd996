#include "pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace fakebob {

void validate_pso_config(const PsoConfig& cfg) {
  require(cfg.particles >= 2, ErrorCategory::invalid_argument, "PSO needs at least two particles");
  require(cfg.epochs >= 1 && cfg.iters_per_epoch >= 1, ErrorCategory::invalid_argument,
          "PSO epochs and iterations must be positive");
  require(cfg.w_end <= cfg.w_init, ErrorCategory::invalid_argument,
          "PSO inertia must decay: w_end <= w_init");
  require(std::isfinite(cfg.epsilon) && cfg.epsilon >= 0.0, ErrorCategory::invalid_argument,
          "PSO epsilon must be >= 0");
  require(cfg.kappa >= 0.0, ErrorCategory::invalid_argument, "PSO kappa must be >= 0");
}

namespace {

double nan_snr(const Waveform& original, const Waveform& adversarial) {
  for (std::size_t i = 0; i < original.samples.size(); ++i)
    if (original.samples[i] != adversarial.samples[i]) return snr(original, adversarial).snr_db;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

AttackResult pso_attack(const Waveform& original, QueryOracle& oracle, const LossKind& kind,
                        double theta_for_loss, const PsoConfig& cfg) {
  validate_waveform(original);
  validate_pso_config(cfg);

  const std::uint64_t q0 = oracle.queries();
  const std::size_t n = original.samples.size();
  const int P = cfg.particles;
  Rng rng(cfg.seed);

  auto evaluate = [&](const std::vector<double>& pos, DecisionOutcome* outcome_out) {
    Waveform probe;
    probe.sample_rate = original.sample_rate;
    probe.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) probe.samples[i] = original.samples[i] + pos[i];
    DecisionOutcome o = oracle.query(probe);
    double loss = eval_loss(kind, o.scores, theta_for_loss, cfg.kappa);
    if (outcome_out) *outcome_out = o;
    return loss;
  };

  // Positions are perturbations; clip_eps keeps original+pos valid and inside
  // the ball after every move.
  auto reproject = [&](std::vector<double>& pos) {
    Waveform candidate;
    candidate.sample_rate = original.sample_rate;
    candidate.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) candidate.samples[i] = original.samples[i] + pos[i];
    Waveform clipped = clip_eps(candidate, original, cfg.epsilon);
    for (std::size_t i = 0; i < n; ++i) pos[i] = clipped.samples[i] - original.samples[i];
  };

  std::vector<std::vector<double>> pos(static_cast<std::size_t>(P), std::vector<double>(n));
  std::vector<std::vector<double>> vel(static_cast<std::size_t>(P), std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> pbest(static_cast<std::size_t>(P));
  std::vector<double> pbest_loss(static_cast<std::size_t>(P),
                                 std::numeric_limits<double>::infinity());
  std::vector<double> gbest(n, 0.0);
  double gbest_loss = std::numeric_limits<double>::infinity();

  AttackResult result;
  result.adversarial = original;

  auto finish = [&](bool success, const std::vector<double>& best_pos, int iterations) {
    Waveform adv;
    adv.sample_rate = original.sample_rate;
    adv.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) adv.samples[i] = original.samples[i] + best_pos[i];
    result.adversarial = std::move(adv);
    result.success = success;
    result.iterations = iterations;
    result.queries = oracle.queries() - q0;
    result.snr_db = nan_snr(original, result.adversarial);
    return result;
  };

  // Initial swarm, uniform in [-eps, eps]^n.
  for (int p = 0; p < P; ++p) {
    for (std::size_t i = 0; i < n; ++i)
      pos[static_cast<std::size_t>(p)][i] = rng.uniform(-cfg.epsilon, cfg.epsilon);
    reproject(pos[static_cast<std::size_t>(p)]);
    DecisionOutcome o;
    double loss = evaluate(pos[static_cast<std::size_t>(p)], &o);
    pbest[static_cast<std::size_t>(p)] = pos[static_cast<std::size_t>(p)];
    pbest_loss[static_cast<std::size_t>(p)] = loss;
    if (loss < gbest_loss) {
      gbest_loss = loss;
      gbest = pos[static_cast<std::size_t>(p)];
    }
    if (goal_met(kind, o) && loss <= -cfg.kappa)
      return finish(true, pos[static_cast<std::size_t>(p)], 0);
  }
  result.loss_trace.push_back(gbest_loss);

  const double vmax = 2.0 * cfg.epsilon;
  const long total_steps = static_cast<long>(cfg.epochs) * cfg.iters_per_epoch;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int it = 0; it < cfg.iters_per_epoch; ++it, ++step) {
      double frac = total_steps <= 1 ? 1.0
                                     : static_cast<double>(step) / static_cast<double>(total_steps - 1);
      double w = cfg.w_init + (cfg.w_end - cfg.w_init) * frac;
      for (int p = 0; p < P; ++p) {
        auto& x = pos[static_cast<std::size_t>(p)];
        auto& v = vel[static_cast<std::size_t>(p)];
        const auto& pb = pbest[static_cast<std::size_t>(p)];
        for (std::size_t i = 0; i < n; ++i) {
          double r1 = rng.uniform();
          double r2 = rng.uniform();
          double vi = w * v[i] + cfg.c1 * r1 * (pb[i] - x[i]) + cfg.c2 * r2 * (gbest[i] - x[i]);
          v[i] = std::clamp(vi, -vmax, vmax);
          x[i] += v[i];
        }
        reproject(x);
        DecisionOutcome o;
        double loss = evaluate(x, &o);
        if (loss < pbest_loss[static_cast<std::size_t>(p)]) {
          pbest_loss[static_cast<std::size_t>(p)] = loss;
          pbest[static_cast<std::size_t>(p)] = x;
        }
        if (loss < gbest_loss) {
          gbest_loss = loss;
          gbest = x;
        }
        if (goal_met(kind, o) && loss <= -cfg.kappa)
          return finish(true, x, static_cast<int>(step) + 1);
      }
      result.loss_trace.push_back(gbest_loss);
    }
  }
  AttackResult r = finish(false, gbest, static_cast<int>(total_steps));
  return r;
}

}  // namespace fakebob
