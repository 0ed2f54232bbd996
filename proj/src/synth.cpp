#include "synth.hpp"

#include <cmath>
#include <cstdio>

#include "error.hpp"
#include "rng.hpp"

namespace fakebob {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Coefficients are refreshed once per block so formants can glide; filter
// state persists across blocks.
constexpr int kBlockSamples = 160;

struct Resonator {
  double y1 = 0.0;
  double y2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double g = 1.0;

  void retune(double center_hz, double bandwidth_hz, int sample_rate) {
    double r = std::exp(-3.14159265358979323846 * bandwidth_hz / sample_rate);
    a1 = 2.0 * r * std::cos(kTwoPi * center_hz / sample_rate);
    a2 = -r * r;
    g = 1.0 - r;
  }

  double step(double x) {
    double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

std::string synthetic_speaker_id(int speaker_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", speaker_index);
  return buf;
}

SpeakerVoiceProfile speaker_profile(std::uint64_t corpus_seed, int speaker_index) {
  Rng rng(derive_seed(corpus_seed, static_cast<std::uint64_t>(speaker_index), 0));
  SpeakerVoiceProfile p;
  bool low = speaker_index % 2 == 0;
  p.family = low ? "low" : "high";
  p.f0_base = low ? rng.uniform(95.0, 140.0) : rng.uniform(175.0, 245.0);
  int n_formants = 4 + static_cast<int>(rng.index(2));  // 4..5
  const double lo_edges[5] = {280.0, 950.0, 2300.0, 3400.0, 4800.0};
  const double hi_edges[5] = {850.0, 2100.0, 3300.0, 4600.0, 6200.0};
  for (int i = 0; i < n_formants; ++i) {
    p.formant_hz.push_back(rng.uniform(lo_edges[i], hi_edges[i]));
    p.formant_bw.push_back(rng.uniform(150.0, 400.0));
  }
  p.noise_mix = rng.uniform(0.12, 0.3);
  return p;
}

Waveform synthesize_utterance(std::uint64_t corpus_seed, int speaker_index, int utt_index,
                              double duration_s, int sample_rate) {
  require(duration_s > 0.0, ErrorCategory::invalid_argument, "duration must be positive");
  require(sample_rate >= 8000, ErrorCategory::invalid_argument, "sample rate must be >= 8000");
  SpeakerVoiceProfile prof = speaker_profile(corpus_seed, speaker_index);
  Rng rng(derive_seed(corpus_seed, static_cast<std::uint64_t>(speaker_index),
                      1 + static_cast<std::uint64_t>(utt_index)));

  std::size_t n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  require(n >= 1, ErrorCategory::invalid_argument, "duration collapses to zero samples");
  const std::size_t n_formants = prof.formant_hz.size();

  // Per-utterance randomization: pitch, formant jitter, glides and the
  // vowel-like oscillation that moves frames around within one utterance.
  double f0 = prof.f0_base * (1.0 + rng.uniform(-0.08, 0.08));
  double drift = rng.uniform(-0.04, 0.04);
  double vib_rate = rng.uniform(4.5, 6.5);
  double vib_depth = rng.uniform(0.005, 0.02);
  double vib_phase = rng.uniform(0.0, kTwoPi);
  double syl_rate = rng.uniform(2.0, 3.5);
  double syl_depth = rng.uniform(0.2, 0.5);
  double syl_phase = rng.uniform(0.0, kTwoPi);
  double peak_target = rng.uniform(0.25, 0.45);

  std::vector<double> base_hz(n_formants), glide(n_formants), vowel_depth(n_formants),
      vowel_phase(n_formants);
  std::vector<Resonator> cascade(n_formants);
  for (std::size_t i = 0; i < n_formants; ++i) {
    base_hz[i] = prof.formant_hz[i] * (1.0 + rng.uniform(-0.05, 0.05));
    glide[i] = rng.uniform(-0.08, 0.08);        // relative sweep over the utterance
    vowel_depth[i] = rng.uniform(0.04, 0.12);   // oscillation between vowel targets
    vowel_phase[i] = rng.uniform(0.0, kTwoPi);
  }
  double vowel_rate = rng.uniform(1.5, 3.0);

  std::vector<double> x(n, 0.0);
  double phase = 1.0;  // emits a pulse on the first sample
  for (std::size_t i = 0; i < n; ++i) {
    double t_rel = static_cast<double>(i) / static_cast<double>(n);
    double inst_f0 = f0 * (1.0 + drift * (t_rel - 0.5) +
                           vib_depth * std::sin(kTwoPi * vib_rate * i / sample_rate + vib_phase));
    phase += inst_f0 / sample_rate;
    double s = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      s += 1.0;
    }
    s += prof.noise_mix * rng.normal();
    x[i] = s;
  }

  // Time-varying resonator cascade, block-updated.
  for (std::size_t start = 0; start < n; start += kBlockSamples) {
    std::size_t end = std::min(n, start + kBlockSamples);
    double t_rel = static_cast<double>(start) / static_cast<double>(n);
    double t_sec = static_cast<double>(start) / sample_rate;
    for (std::size_t f = 0; f < n_formants; ++f) {
      double center = base_hz[f] *
                      (1.0 + glide[f] * (t_rel - 0.5) +
                       vowel_depth[f] * std::sin(kTwoPi * vowel_rate * t_sec + vowel_phase[f]));
      center = std::min(center, 0.45 * sample_rate);
      cascade[f].retune(center, prof.formant_bw[f], sample_rate);
    }
    for (std::size_t i = start; i < end; ++i) {
      double v = x[i];
      for (std::size_t f = 0; f < n_formants; ++f) v = cascade[f].step(v);
      x[i] = v;
    }
  }

  // Amplitude envelope: edge fades plus syllabic modulation.
  double fade = std::min<double>(0.03 * sample_rate, static_cast<double>(n) / 4.0);
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (fade > 0.0) {
      if (static_cast<double>(i) < fade) env *= static_cast<double>(i) / fade;
      double from_end = static_cast<double>(n - 1 - i);
      if (from_end < fade) env *= from_end / fade;
    }
    env *= 1.0 - syl_depth * 0.5 * (1.0 - std::cos(kTwoPi * syl_rate * i / sample_rate + syl_phase));
    x[i] *= env;
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double peak = 0.0;
  for (double& v : x) {
    v -= mean;
    peak = std::max(peak, std::fabs(v));
  }
  if (peak == 0.0) {
    x[0] = peak_target;  // degenerate ultra-short utterance
  } else {
    double scale = peak_target / peak;
    for (double& v : x) v *= scale;
  }

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples = std::move(x);
  return w;
}

std::vector<LabeledUtterance> generate_synthetic_corpus(const SynthesisSpec& spec) {
  require(spec.n_speakers >= 2, ErrorCategory::invalid_argument,
          "corpus needs at least two speakers");
  require(spec.utts_per_speaker >= 1, ErrorCategory::invalid_argument,
          "corpus needs at least one utterance per speaker");
  std::vector<LabeledUtterance> out;
  out.reserve(static_cast<std::size_t>(spec.n_speakers) *
              static_cast<std::size_t>(spec.utts_per_speaker));
  for (int s = 0; s < spec.n_speakers; ++s) {
    SpeakerVoiceProfile prof = speaker_profile(spec.seed, s);
    for (int u = 0; u < spec.utts_per_speaker; ++u) {
      LabeledUtterance utt;
      utt.speaker_index = s;
      utt.speaker_id = synthetic_speaker_id(s);
      utt.family = prof.family;
      utt.utt_index = u;
      utt.wave = synthesize_utterance(spec.seed, s, u, spec.duration_s, spec.sample_rate);
      out.push_back(std::move(utt));
    }
  }
  return out;
}

}  // namespace fakebob
