#pragma once

#include <functional>
#include <vector>

#include "audio.hpp"
#include "rng.hpp"

namespace fakebob {

using LossAt = std::function<double(const Waveform&)>;

// Antithetic NES estimate of the loss gradient at x:
// (1/(m*sigma)) * sum_j f(x + sigma*u_j) * u_j with u_{m+1-j} = -u_j.
// Probes are clamped to [-1, 1] for validity but not to any epsilon-ball.
// Pairs are accumulated as (f+ - f-) * u_j so a constant loss yields an
// exactly zero vector. `loss_at` is called exactly m times; when
// `parallelism` > 1 calls within an iteration run concurrently and are
// reduced in a fixed order, so it must be thread-safe.
std::vector<double> nes_gradient(const Waveform& x, const LossAt& loss_at, int m, double sigma,
                                 Rng& rng, int parallelism = 1);

}  // namespace fakebob
