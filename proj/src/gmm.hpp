#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "features.hpp"

namespace fakebob {

// Diagonal-covariance Gaussian mixture.
struct DiagGmm {
  int num_components = 0;
  int dim = 0;
  std::vector<double> weights;    // K, simplex
  std::vector<double> means;      // K*D row-major
  std::vector<double> variances;  // K*D, strictly positive
};

void validate_gmm(const DiagGmm& g);

// Per-component constants precomputed for fast frame log-likelihoods.
// Read-only after construction, safe to share across threads.
class GmmScorer {
 public:
  explicit GmmScorer(const DiagGmm& g);

  int dim() const { return dim_; }
  int num_components() const { return num_components_; }

  // log p(x) under the mixture.
  double frame_loglike(const double* x) const;

  // out[k] = log(w_k) + log N(x; mu_k, var_k); returns logsumexp(out).
  double frame_component_loglikes(const double* x, double* out) const;

 private:
  int num_components_;
  int dim_;
  std::vector<double> log_const_;  // log w_k - 0.5 sum_d log(2 pi var_kd)
  std::vector<double> half_inv_var_;
  std::vector<double> means_;
};

struct UbmTrainInfo {
  // Mean per-frame data log-likelihood after each EM iteration.
  std::vector<double> loglike_trace;
};

// K-means initialization (seeded) followed by em_iters rounds of diagonal
// EM over the pooled voiced frames. Variances are floored at
// 1e-3 * the global per-dimension variance.
DiagGmm train_ubm(const std::vector<FeatureMatrix>& corpus, int num_components, int em_iters,
                  std::uint64_t seed, UbmTrainInfo* info = nullptr);

struct SpeakerModel {
  std::string speaker_id;
  DiagGmm gmm;
};

// Means-only MAP adaptation: mu_k <- alpha_k E_k(x) + (1-alpha_k) mu_ubm,
// alpha_k = n_k / (n_k + relevance). Weights and variances copy from the UBM.
SpeakerModel map_adapt(const DiagGmm& ubm, const FeatureMatrix& speaker_features,
                       double relevance, const std::string& speaker_id);

}  // namespace fakebob
