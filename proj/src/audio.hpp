#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fakebob {

// Amplitude-normalized mono audio. Every sample is finite and in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
};

struct SnrReport {
  double snr_db = 0.0;
  double signal_power = 0.0;
  double noise_power = 0.0;
};

// Throws when the Waveform invariants are violated.
void validate_waveform(const Waveform& w);

// 16-bit PCM mono WAV only. Integer sample v maps to v/32768 on read;
// amplitude a maps to round(a*32767) clamped to int16 on write.
Waveform read_wav_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_wav_bytes(const Waveform& w);
Waveform read_wav_file(const std::string& path);
void write_wav_file(const Waveform& w, const std::string& path);

// Per-sample clip to the L-inf epsilon-ball around `original`, intersected
// with the valid range: max{min{c, 1, o+eps}, -1, o-eps}.
Waveform clip_eps(const Waveform& candidate, const Waveform& original, double epsilon);

// 10*log10(P_signal / P_noise) with mean-square powers. Zero perturbation is
// an error, not +inf.
SnrReport snr(const Waveform& original, const Waveform& adversarial);

double linf_distance(const Waveform& a, const Waveform& b);

}  // namespace fakebob
