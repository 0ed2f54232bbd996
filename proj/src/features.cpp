#include "features.hpp"

#include <cmath>

#include "dft.hpp"
#include "error.hpp"

namespace fakebob {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int next_pow2(int n) {
  int p = 2;
  while (p < n) p <<= 1;
  return p;
}

// Triangular filters over FFT bins, mel-spaced between 0 Hz and Nyquist.
std::vector<std::vector<double>> mel_filterbank(int n_mels, int nfft, int sample_rate) {
  int n_bins = nfft / 2 + 1;
  double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers(static_cast<std::size_t>(n_mels) + 2);
  for (int m = 0; m < n_mels + 2; ++m)
    centers[static_cast<std::size_t>(m)] = mel_to_hz(mel_max * m / (n_mels + 1));
  std::vector<std::vector<double>> bank(static_cast<std::size_t>(n_mels));
  for (int m = 0; m < n_mels; ++m) {
    double lo = centers[static_cast<std::size_t>(m)];
    double mid = centers[static_cast<std::size_t>(m) + 1];
    double hi = centers[static_cast<std::size_t>(m) + 2];
    auto& filt = bank[static_cast<std::size_t>(m)];
    filt.assign(static_cast<std::size_t>(n_bins), 0.0);
    for (int b = 0; b < n_bins; ++b) {
      double f = static_cast<double>(b) * sample_rate / nfft;
      if (f > lo && f < mid)
        filt[static_cast<std::size_t>(b)] = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        filt[static_cast<std::size_t>(b)] = (hi - f) / (hi - mid);
    }
  }
  return bank;
}

}  // namespace

void validate_feature_config(const FeatureConfig& cfg) {
  require(cfg.frame_step_ms > 0.0 && cfg.frame_len_ms >= cfg.frame_step_ms,
          ErrorCategory::invalid_argument, "feature config: need frame_len_ms >= frame_step_ms > 0");
  require(cfg.preemphasis >= 0.0 && cfg.preemphasis < 1.0, ErrorCategory::invalid_argument,
          "feature config: preemphasis must be in [0, 1)");
  require(cfg.n_mels >= 1, ErrorCategory::invalid_argument, "feature config: n_mels must be >= 1");
  require(cfg.n_ceps >= 1 && cfg.n_ceps <= cfg.n_mels, ErrorCategory::invalid_argument,
          "feature config: need 1 <= n_ceps <= n_mels");
  require(cfg.delta_window >= 1, ErrorCategory::invalid_argument,
          "feature config: delta_window must be >= 1");
  require(cfg.vad_energy_ratio > 0.0 && cfg.vad_energy_ratio < 1.0, ErrorCategory::invalid_argument,
          "feature config: vad_energy_ratio must be in (0, 1)");
}

FrameGeometry frame_geometry(std::size_t num_samples, int sample_rate, const FeatureConfig& cfg) {
  validate_feature_config(cfg);
  FrameGeometry g;
  g.frame_len = static_cast<int>(std::lround(cfg.frame_len_ms * sample_rate / 1000.0));
  g.frame_step = static_cast<int>(std::lround(cfg.frame_step_ms * sample_rate / 1000.0));
  require(g.frame_len >= 1 && g.frame_step >= 1, ErrorCategory::invalid_argument,
          "feature config: frame geometry collapses to zero samples");
  require(num_samples >= static_cast<std::size_t>(g.frame_len), ErrorCategory::data,
          "waveform shorter than one frame");
  g.num_frames = 1 + static_cast<int>((num_samples - static_cast<std::size_t>(g.frame_len)) /
                                      static_cast<std::size_t>(g.frame_step));
  return g;
}

std::vector<std::uint8_t> energy_vad(const Waveform& w, const FeatureConfig& cfg) {
  FrameGeometry g = frame_geometry(w.samples.size(), w.sample_rate, cfg);
  std::vector<double> rms(static_cast<std::size_t>(g.num_frames));
  double max_rms = 0.0;
  for (int t = 0; t < g.num_frames; ++t) {
    const double* frame = w.samples.data() + static_cast<std::size_t>(t) * g.frame_step;
    double e = 0.0;
    for (int i = 0; i < g.frame_len; ++i) e += frame[i] * frame[i];
    rms[static_cast<std::size_t>(t)] = std::sqrt(e / g.frame_len);
    max_rms = std::max(max_rms, rms[static_cast<std::size_t>(t)]);
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.num_frames), 0);
  if (max_rms == 0.0) return mask;  // silence: everything unvoiced
  double threshold = cfg.vad_energy_ratio * max_rms;
  for (int t = 0; t < g.num_frames; ++t)
    mask[static_cast<std::size_t>(t)] = rms[static_cast<std::size_t>(t)] >= threshold ? 1 : 0;
  return mask;
}

FeatureMatrix mfcc(const Waveform& w, const FeatureConfig& cfg) {
  validate_waveform(w);
  FrameGeometry g = frame_geometry(w.samples.size(), w.sample_rate, cfg);

  std::vector<double> emph(w.samples.size());
  emph[0] = w.samples[0];
  for (std::size_t i = 1; i < w.samples.size(); ++i)
    emph[i] = w.samples[i] - cfg.preemphasis * w.samples[i - 1];

  int nfft = next_pow2(g.frame_len);
  int n_bins = nfft / 2 + 1;
  Fft fft(nfft);
  auto bank = mel_filterbank(cfg.n_mels, nfft, w.sample_rate);

  std::vector<double> window(static_cast<std::size_t>(g.frame_len));
  for (int i = 0; i < g.frame_len; ++i)
    window[static_cast<std::size_t>(i)] =
        g.frame_len == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * kPi * i / (g.frame_len - 1));

  // Orthonormal DCT-II table: dct[k][m].
  std::vector<double> dct(static_cast<std::size_t>(cfg.n_ceps) * cfg.n_mels);
  for (int k = 0; k < cfg.n_ceps; ++k) {
    double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / cfg.n_mels);
    for (int m = 0; m < cfg.n_mels; ++m)
      dct[static_cast<std::size_t>(k) * cfg.n_mels + m] =
          scale * std::cos(kPi * k * (2 * m + 1) / (2.0 * cfg.n_mels));
  }

  FeatureMatrix out;
  out.num_frames = g.num_frames;
  out.dim = cfg.n_ceps;
  out.data.assign(static_cast<std::size_t>(g.num_frames) * cfg.n_ceps, 0.0);
  out.voiced_mask = energy_vad(w, cfg);

  std::vector<double> re(static_cast<std::size_t>(nfft));
  std::vector<double> im(static_cast<std::size_t>(nfft));
  std::vector<double> logmel(static_cast<std::size_t>(cfg.n_mels));
  for (int t = 0; t < g.num_frames; ++t) {
    const double* frame = emph.data() + static_cast<std::size_t>(t) * g.frame_step;
    for (int i = 0; i < g.frame_len; ++i) re[static_cast<std::size_t>(i)] = frame[i] * window[static_cast<std::size_t>(i)];
    std::fill(re.begin() + g.frame_len, re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    fft.transform(re.data(), im.data());
    for (int m = 0; m < cfg.n_mels; ++m) {
      const auto& filt = bank[static_cast<std::size_t>(m)];
      double e = 0.0;
      for (int b = 0; b < n_bins; ++b) {
        double wgt = filt[static_cast<std::size_t>(b)];
        if (wgt != 0.0)
          e += wgt * std::hypot(re[static_cast<std::size_t>(b)], im[static_cast<std::size_t>(b)]);
      }
      logmel[static_cast<std::size_t>(m)] = std::log(std::max(e, kLogFloor));
    }
    double* row = out.row(t);
    for (int k = 0; k < cfg.n_ceps; ++k) {
      double acc = 0.0;
      const double* dk = dct.data() + static_cast<std::size_t>(k) * cfg.n_mels;
      for (int m = 0; m < cfg.n_mels; ++m) acc += dk[m] * logmel[static_cast<std::size_t>(m)];
      row[k] = acc;
    }
  }
  return out;
}

FeatureMatrix append_deltas(const FeatureMatrix& f, int window) {
  require(window >= 1, ErrorCategory::invalid_argument, "delta window must be >= 1");
  require(f.num_frames >= 1 && f.dim >= 1, ErrorCategory::invalid_argument,
          "append_deltas: empty feature matrix");
  const int T = f.num_frames;
  const int D = f.dim;
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;

  auto regress = [&](const std::vector<double>& src, std::vector<double>& dst) {
    for (int t = 0; t < T; ++t) {
      for (int d = 0; d < D; ++d) {
        double acc = 0.0;
        for (int n = 1; n <= window; ++n) {
          int hi = std::min(t + n, T - 1);
          int lo = std::max(t - n, 0);
          acc += n * (src[static_cast<std::size_t>(hi) * D + d] -
                      src[static_cast<std::size_t>(lo) * D + d]);
        }
        dst[static_cast<std::size_t>(t) * D + d] = acc / denom;
      }
    }
  };

  std::vector<double> delta(static_cast<std::size_t>(T) * D);
  std::vector<double> delta2(static_cast<std::size_t>(T) * D);
  regress(f.data, delta);
  regress(delta, delta2);

  FeatureMatrix out;
  out.num_frames = T;
  out.dim = 3 * D;
  out.voiced_mask = f.voiced_mask;
  out.data.resize(static_cast<std::size_t>(T) * out.dim);
  for (int t = 0; t < T; ++t) {
    double* row = out.row(t);
    const double* s = f.row(t);
    for (int d = 0; d < D; ++d) {
      row[d] = s[d];
      row[D + d] = delta[static_cast<std::size_t>(t) * D + d];
      row[2 * D + d] = delta2[static_cast<std::size_t>(t) * D + d];
    }
  }
  return out;
}

FeatureMatrix extract_features(const Waveform& w, const FeatureConfig& cfg) {
  return append_deltas(mfcc(w, cfg), cfg.delta_window);
}

}  // namespace fakebob
