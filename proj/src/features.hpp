#pragma once

#include <cstdint>
#include <vector>

#include "audio.hpp"

namespace fakebob {

struct FeatureConfig {
  double frame_len_ms = 25.0;
  double frame_step_ms = 10.0;
  double preemphasis = 0.97;
  int n_mels = 26;
  int n_ceps = 13;  // static cepstra kept (includes c0); 3x after deltas
  int delta_window = 2;
  double vad_energy_ratio = 0.05;
};

void validate_feature_config(const FeatureConfig& cfg);

// Row-major T x D matrix plus the per-frame voicing decision.
struct FeatureMatrix {
  std::vector<double> data;
  int num_frames = 0;
  int dim = 0;
  std::vector<std::uint8_t> voiced_mask;

  double* row(int t) { return data.data() + static_cast<std::size_t>(t) * dim; }
  const double* row(int t) const { return data.data() + static_cast<std::size_t>(t) * dim; }
};

struct FrameGeometry {
  int frame_len = 0;
  int frame_step = 0;
  int num_frames = 0;
};

FrameGeometry frame_geometry(std::size_t num_samples, int sample_rate, const FeatureConfig& cfg);

// Static MFCCs (dim == n_ceps): pre-emphasis, Hamming window, magnitude
// spectrum, triangular mel filterbank on [0, Nyquist], log with a 1e-10
// floor, orthonormal DCT-II keeping coefficients 0..n_ceps-1. The voiced
// mask comes from energy_vad on the same frame grid.
FeatureMatrix mfcc(const Waveform& w, const FeatureConfig& cfg);

// Regression deltas with edge replication; output dim is 3x the input dim.
FeatureMatrix append_deltas(const FeatureMatrix& f, int window);

// Frame voiced iff its RMS energy >= vad_energy_ratio * max frame RMS.
std::vector<std::uint8_t> energy_vad(const Waveform& w, const FeatureConfig& cfg);

// mfcc + append_deltas with the config's delta window.
FeatureMatrix extract_features(const Waveform& w, const FeatureConfig& cfg);

}  // namespace fakebob
