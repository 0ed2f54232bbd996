#include "nes.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "threadpool.hpp"

namespace fakebob {

std::vector<double> nes_gradient(const Waveform& x, const LossAt& loss_at, int m, double sigma,
                                 Rng& rng, int parallelism) {
  require(m >= 2 && m % 2 == 0, ErrorCategory::invalid_argument,
          "NES samples per draw must be an even positive number");
  require(sigma > 0.0, ErrorCategory::invalid_argument, "NES search variance must be positive");
  const std::size_t n = x.samples.size();
  const std::size_t pairs = static_cast<std::size_t>(m) / 2;

  // Noise is drawn sequentially from the caller's stream regardless of the
  // evaluation parallelism, keeping the estimate a pure function of the seed.
  std::vector<double> noise(pairs * n);
  for (double& v : noise) v = rng.normal();

  std::vector<double> diff(pairs, 0.0);
  auto probe_pair = [&](std::size_t j) {
    const double* u = noise.data() + j * n;
    Waveform plus, minus;
    plus.sample_rate = x.sample_rate;
    minus.sample_rate = x.sample_rate;
    plus.samples.resize(n);
    minus.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      plus.samples[i] = std::clamp(x.samples[i] + sigma * u[i], -1.0, 1.0);
      minus.samples[i] = std::clamp(x.samples[i] - sigma * u[i], -1.0, 1.0);
    }
    diff[j] = loss_at(plus) - loss_at(minus);
  };
  parallel_for(pairs, parallelism, probe_pair);

  std::vector<double> grad(n, 0.0);
  for (std::size_t j = 0; j < pairs; ++j) {
    const double* u = noise.data() + j * n;
    double d = diff[j];
    if (d == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) grad[i] += d * u[i];
  }
  const double scale = 1.0 / (static_cast<double>(m) * sigma);
  for (double& g : grad) g *= scale;
  return grad;
}

}  // namespace fakebob
