#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attack.hpp"
#include "defenses_spec.hpp"
#include "metrics.hpp"

namespace fakebob {

std::string defense_name(const DefenseSpec& spec);

// Median of the length-k window centered on each sample, edges replicated.
Waveform median_filter(const Waveform& w, int k);

// Linear-interpolation down-sample to tau*fs and reconstruction at fs with
// the exact original length; tau = 1 is the bit-exact identity.
Waveform audio_squeeze(const Waveform& w, double tau);

// Round each amplitude to the nearest multiple of q in the int16 domain
// (round(a*32767), ties away from zero), then map back through /32767.
Waveform quantize(const Waveform& w, int q);

Waveform apply_defense(const DefenseSpec& spec, const Waveform& w);

// S1: voices were crafted against the undefended system; the defense runs
// only at evaluation time.
struct AdversarialVoice {
  Waveform wave;
  std::optional<int> target;  // targeted-attack goal (OSI/CSI)
  std::optional<int> source;  // source speaker, needed for CSI UTR
};
struct BenignVoice {
  Waveform wave;
  std::optional<int> true_speaker;  // enrolled index, or nullopt for imposters
};

MetricsReport apply_defense_s1(const std::optional<DefenseSpec>& defense,
                               const std::vector<AdversarialVoice>& adversarial,
                               const std::vector<BenignVoice>& normal, const Recognizer& rec);

// S2: the defense sits inside the oracle the attack queries.
struct AttackTrialSpec {
  Waveform original;
  LossKind kind;
  double theta_for_loss = 0.0;
  std::uint64_t seed = 0;
};

struct DefenseS2Report {
  std::vector<AttackResult> results;
  double asr = 0.0;
  double median_iterations = 0.0;  // failures count as max_iter
  int trials = 0;
};

DefenseS2Report apply_defense_s2(const std::optional<DefenseSpec>& defense, const Recognizer& rec,
                                 const std::vector<AttackTrialSpec>& trials,
                                 const AttackConfig& cfg, int parallelism = 1);

}  // namespace fakebob
