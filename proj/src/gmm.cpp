#include "gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace fakebob {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinVarianceFloor = 1e-10;

// Pools voiced frames from all matrices into one row-major block.
std::vector<double> pool_voiced(const std::vector<FeatureMatrix>& corpus, int* dim_out,
                                std::size_t* count_out) {
  int dim = 0;
  std::size_t count = 0;
  for (const auto& f : corpus) {
    if (f.num_frames == 0) continue;
    if (dim == 0) dim = f.dim;
    require(f.dim == dim, ErrorCategory::invalid_argument,
            "train_ubm: feature dimension mismatch across corpus");
    require(f.voiced_mask.size() == static_cast<std::size_t>(f.num_frames),
            ErrorCategory::invalid_argument, "train_ubm: voiced mask length mismatch");
    for (int t = 0; t < f.num_frames; ++t)
      if (f.voiced_mask[static_cast<std::size_t>(t)]) ++count;
  }
  std::vector<double> frames(count * static_cast<std::size_t>(dim));
  std::size_t r = 0;
  for (const auto& f : corpus)
    for (int t = 0; t < f.num_frames; ++t)
      if (f.voiced_mask[static_cast<std::size_t>(t)]) {
        std::copy(f.row(t), f.row(t) + dim, frames.begin() + static_cast<std::ptrdiff_t>(r * static_cast<std::size_t>(dim)));
        ++r;
      }
  *dim_out = dim;
  *count_out = count;
  return frames;
}

std::vector<double> global_variance_floor(const std::vector<double>& frames, std::size_t T, int D) {
  std::vector<double> mean(static_cast<std::size_t>(D), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(D), 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (int d = 0; d < D; ++d) {
      double v = frames[t * static_cast<std::size_t>(D) + static_cast<std::size_t>(d)];
      mean[static_cast<std::size_t>(d)] += v;
      sq[static_cast<std::size_t>(d)] += v * v;
    }
  std::vector<double> floor(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    double m = mean[static_cast<std::size_t>(d)] / static_cast<double>(T);
    double var = sq[static_cast<std::size_t>(d)] / static_cast<double>(T) - m * m;
    floor[static_cast<std::size_t>(d)] = std::max(1e-3 * var, kMinVarianceFloor);
  }
  return floor;
}

}  // namespace

void validate_gmm(const DiagGmm& g) {
  require(g.num_components >= 1 && g.dim >= 1, ErrorCategory::invalid_argument,
          "GMM must have at least one component and one dimension");
  std::size_t kd = static_cast<std::size_t>(g.num_components) * static_cast<std::size_t>(g.dim);
  require(g.weights.size() == static_cast<std::size_t>(g.num_components) &&
              g.means.size() == kd && g.variances.size() == kd,
          ErrorCategory::invalid_argument, "GMM parameter sizes are inconsistent");
  double sum = 0.0;
  for (double w : g.weights) {
    require(w >= 0.0, ErrorCategory::invalid_argument, "GMM weight is negative");
    sum += w;
  }
  require(std::fabs(sum - 1.0) <= 1e-9, ErrorCategory::invalid_argument,
          "GMM weights do not sum to 1");
  for (double v : g.variances)
    require(v > 0.0 && std::isfinite(v), ErrorCategory::invalid_argument,
            "GMM variance must be positive and finite");
}

GmmScorer::GmmScorer(const DiagGmm& g) : num_components_(g.num_components), dim_(g.dim) {
  validate_gmm(g);
  std::size_t kd = static_cast<std::size_t>(num_components_) * static_cast<std::size_t>(dim_);
  log_const_.resize(static_cast<std::size_t>(num_components_));
  half_inv_var_.resize(kd);
  means_ = g.means;
  for (int k = 0; k < num_components_; ++k) {
    double c = g.weights[static_cast<std::size_t>(k)] > 0.0
                   ? std::log(g.weights[static_cast<std::size_t>(k)])
                   : -std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim_; ++d) {
      std::size_t i = static_cast<std::size_t>(k) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(d);
      c -= 0.5 * (kLog2Pi + std::log(g.variances[i]));
      half_inv_var_[i] = 0.5 / g.variances[i];
    }
    log_const_[static_cast<std::size_t>(k)] = c;
  }
}

double GmmScorer::frame_component_loglikes(const double* x, double* out) const {
  double max_ll = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_components_; ++k) {
    const double* mu = means_.data() + static_cast<std::size_t>(k) * dim_;
    const double* a = half_inv_var_.data() + static_cast<std::size_t>(k) * dim_;
    double q = 0.0;
    for (int d = 0; d < dim_; ++d) {
      double diff = x[d] - mu[d];
      q += a[d] * diff * diff;
    }
    double ll = log_const_[static_cast<std::size_t>(k)] - q;
    out[k] = ll;
    if (ll > max_ll) max_ll = ll;
  }
  double sum = 0.0;
  for (int k = 0; k < num_components_; ++k) sum += std::exp(out[k] - max_ll);
  return max_ll + std::log(sum);
}

double GmmScorer::frame_loglike(const double* x) const {
  std::vector<double> ll(static_cast<std::size_t>(num_components_));
  return frame_component_loglikes(x, ll.data());
}

DiagGmm train_ubm(const std::vector<FeatureMatrix>& corpus, int num_components, int em_iters,
                  std::uint64_t seed, UbmTrainInfo* info) {
  require(num_components >= 1, ErrorCategory::invalid_argument, "train_ubm: K must be >= 1");
  require(em_iters >= 1, ErrorCategory::invalid_argument, "train_ubm: em_iters must be >= 1");
  int D = 0;
  std::size_t T = 0;
  std::vector<double> frames = pool_voiced(corpus, &D, &T);
  require(T >= 10 * static_cast<std::size_t>(num_components), ErrorCategory::data,
          "train_ubm: need at least 10*K voiced frames");

  const int K = num_components;
  std::vector<double> floor = global_variance_floor(frames, T, D);

  // Seeded k-means: K distinct frames as initial centroids, then Lloyd steps.
  Rng rng(seed);
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = T - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);

  std::vector<double> centroids(static_cast<std::size_t>(K) * static_cast<std::size_t>(D));
  for (int k = 0; k < K; ++k)
    std::copy(frames.begin() + static_cast<std::ptrdiff_t>(order[static_cast<std::size_t>(k)] * static_cast<std::size_t>(D)),
              frames.begin() + static_cast<std::ptrdiff_t>((order[static_cast<std::size_t>(k)] + 1) * static_cast<std::size_t>(D)),
              centroids.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * static_cast<std::size_t>(D)));

  std::vector<int> assign(T, 0);
  const int kmeans_iters = 10;
  for (int it = 0; it < kmeans_iters; ++it) {
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = frames.data() + t * static_cast<std::size_t>(D);
      double best = std::numeric_limits<double>::infinity();
      int best_k = 0;
      for (int k = 0; k < K; ++k) {
        const double* c = centroids.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
        double dist = 0.0;
        for (int d = 0; d < D; ++d) {
          double diff = x[d] - c[d];
          dist += diff * diff;
        }
        if (dist < best) {
          best = dist;
          best_k = k;
        }
      }
      assign[t] = best_k;
    }
    std::vector<double> sums(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = frames.data() + t * static_cast<std::size_t>(D);
      double* s = sums.data() + static_cast<std::size_t>(assign[t]) * static_cast<std::size_t>(D);
      for (int d = 0; d < D; ++d) s[d] += x[d];
      ++counts[static_cast<std::size_t>(assign[t])];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0) continue;  // keep previous centroid
      double* c = centroids.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
      const double* s = sums.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
      for (int d = 0; d < D; ++d) c[d] = s[d] / static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
  }

  DiagGmm g;
  g.num_components = K;
  g.dim = D;
  g.weights.assign(static_cast<std::size_t>(K), 0.0);
  g.means = centroids;
  g.variances.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
  {
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    std::vector<double> sq(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = frames.data() + t * static_cast<std::size_t>(D);
      std::size_t k = static_cast<std::size_t>(assign[t]);
      ++counts[k];
      const double* c = centroids.data() + k * static_cast<std::size_t>(D);
      for (int d = 0; d < D; ++d) {
        double diff = x[d] - c[d];
        sq[k * static_cast<std::size_t>(D) + static_cast<std::size_t>(d)] += diff * diff;
      }
    }
    for (int k = 0; k < K; ++k) {
      std::size_t c = counts[static_cast<std::size_t>(k)];
      g.weights[static_cast<std::size_t>(k)] = std::max(static_cast<double>(c), 1.0);
      for (int d = 0; d < D; ++d) {
        std::size_t i = static_cast<std::size_t>(k) * static_cast<std::size_t>(D) + static_cast<std::size_t>(d);
        double var = c >= 2 ? sq[i] / static_cast<double>(c) : 0.0;
        g.variances[i] = std::max(var, floor[static_cast<std::size_t>(d)]);
      }
    }
    double wsum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
    for (double& w : g.weights) w /= wsum;
  }

  // EM refinement.
  if (info) info->loglike_trace.clear();
  std::vector<double> comp_ll(static_cast<std::size_t>(K));
  for (int it = 0; it < em_iters; ++it) {
    GmmScorer scorer(g);
    std::vector<double> nk(static_cast<std::size_t>(K), 0.0);
    std::vector<double> sx(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
    std::vector<double> sxx(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
    double total_ll = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = frames.data() + t * static_cast<std::size_t>(D);
      double lse = scorer.frame_component_loglikes(x, comp_ll.data());
      total_ll += lse;
      for (int k = 0; k < K; ++k) {
        double resp = std::exp(comp_ll[static_cast<std::size_t>(k)] - lse);
        if (resp < 1e-12) continue;
        nk[static_cast<std::size_t>(k)] += resp;
        double* sxk = sx.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
        double* sxxk = sxx.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
        for (int d = 0; d < D; ++d) {
          double v = resp * x[d];
          sxk[d] += v;
          sxxk[d] += v * x[d];
        }
      }
    }
    for (int k = 0; k < K; ++k) {
      double n = nk[static_cast<std::size_t>(k)];
      if (n < 1e-8) continue;  // starved component keeps its parameters
      g.weights[static_cast<std::size_t>(k)] = n / static_cast<double>(T);
      for (int d = 0; d < D; ++d) {
        std::size_t i = static_cast<std::size_t>(k) * static_cast<std::size_t>(D) + static_cast<std::size_t>(d);
        double mu = sx[i] / n;
        g.means[i] = mu;
        g.variances[i] = std::max(sxx[i] / n - mu * mu, floor[static_cast<std::size_t>(d)]);
      }
    }
    double wsum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
    for (double& w : g.weights) w /= wsum;
    if (info) info->loglike_trace.push_back(total_ll / static_cast<double>(T));
  }
  return g;
}

SpeakerModel map_adapt(const DiagGmm& ubm, const FeatureMatrix& speaker_features,
                       double relevance, const std::string& speaker_id) {
  require(relevance > 0.0, ErrorCategory::invalid_argument, "map_adapt: relevance must be > 0");
  validate_gmm(ubm);
  const int K = ubm.num_components;
  const int D = ubm.dim;
  require(speaker_features.dim == D, ErrorCategory::invalid_argument,
          "map_adapt: feature dimension mismatch");

  GmmScorer scorer(ubm);
  std::vector<double> nk(static_cast<std::size_t>(K), 0.0);
  std::vector<double> sx(static_cast<std::size_t>(K) * static_cast<std::size_t>(D), 0.0);
  std::vector<double> comp_ll(static_cast<std::size_t>(K));
  std::size_t voiced = 0;
  for (int t = 0; t < speaker_features.num_frames; ++t) {
    if (!speaker_features.voiced_mask[static_cast<std::size_t>(t)]) continue;
    ++voiced;
    const double* x = speaker_features.row(t);
    double lse = scorer.frame_component_loglikes(x, comp_ll.data());
    for (int k = 0; k < K; ++k) {
      double resp = std::exp(comp_ll[static_cast<std::size_t>(k)] - lse);
      if (resp < 1e-12) continue;
      nk[static_cast<std::size_t>(k)] += resp;
      double* sxk = sx.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(D);
      for (int d = 0; d < D; ++d) sxk[d] += resp * x[d];
    }
  }
  require(voiced >= 1, ErrorCategory::data, "map_adapt: no voiced frames to adapt on");

  SpeakerModel model;
  model.speaker_id = speaker_id;
  model.gmm = ubm;
  for (int k = 0; k < K; ++k) {
    double n = nk[static_cast<std::size_t>(k)];
    if (n <= 0.0) continue;
    double alpha = n / (n + relevance);
    for (int d = 0; d < D; ++d) {
      std::size_t i = static_cast<std::size_t>(k) * static_cast<std::size_t>(D) + static_cast<std::size_t>(d);
      double ek = sx[i] / n;
      model.gmm.means[i] = alpha * ek + (1.0 - alpha) * ubm.means[i];
    }
  }
  return model;
}

}  // namespace fakebob
