#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "audio.hpp"

namespace fakebob {

struct SynthesisSpec {
  int n_speakers = 2;
  int utts_per_speaker = 1;
  double duration_s = 1.0;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
};

struct LabeledUtterance {
  int speaker_index = 0;
  std::string speaker_id;
  std::string family;  // "low" or "high" pitch family
  int utt_index = 0;
  Waveform wave;
};

// Speaker-specific source-filter parameters, a pure function of
// (corpus seed, speaker index). Even speaker indices form the low-pitch
// family, odd the high-pitch family.
struct SpeakerVoiceProfile {
  double f0_base = 0.0;
  std::vector<double> formant_hz;
  std::vector<double> formant_bw;
  double noise_mix = 0.0;
  std::string family;
};

SpeakerVoiceProfile speaker_profile(std::uint64_t corpus_seed, int speaker_index);

// Pulse-train + noise excitation through a cascade of resonators with
// per-utterance pitch/formant jitter. Deterministic given
// (corpus_seed, speaker_index, utt_index).
Waveform synthesize_utterance(std::uint64_t corpus_seed, int speaker_index, int utt_index,
                              double duration_s, int sample_rate);

std::vector<LabeledUtterance> generate_synthetic_corpus(const SynthesisSpec& spec);

std::string synthetic_speaker_id(int speaker_index);

}  // namespace fakebob
