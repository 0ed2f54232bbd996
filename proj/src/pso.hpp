#pragma once

#include <cstdint>

#include "attack.hpp"

namespace fakebob {

struct PsoConfig {
  int particles = 50;
  int epochs = 35;
  int iters_per_epoch = 30;
  double w_init = 0.9;
  double w_end = 0.1;
  double c1 = 1.4961;
  double c2 = 1.4961;
  double epsilon = 0.002;
  double kappa = 0.0;
  std::uint64_t seed = 0;
};

void validate_pso_config(const PsoConfig& cfg);

// Particle-swarm baseline over perturbations in the L-inf epsilon-ball.
// Velocities update as w*v + c1*r1.(pbest-p) + c2*r2.(gbest-p) with inertia
// decaying linearly from w_init to w_end over all swarm iterations and a
// per-coordinate velocity clamp of 2*epsilon; positions re-enter the ball
// through clip_eps. One oracle query per particle evaluation; early exit as
// soon as any evaluated particle meets the goal with loss <= -kappa.
AttackResult pso_attack(const Waveform& original, QueryOracle& oracle, const LossKind& kind,
                        double theta_for_loss, const PsoConfig& cfg);

}  // namespace fakebob
