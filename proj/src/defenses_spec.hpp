#pragma once

#include <variant>

namespace fakebob {

struct MedianFilterSpec {
  int k = 1;  // odd window size
};

struct AudioSqueezeSpec {
  double tau = 1.0;  // new/original sampling-frequency ratio, in (0, 1]
};

struct QuantizeSpec {
  int q = 1;  // int16-domain quantization factor
};

using DefenseSpec = std::variant<MedianFilterSpec, AudioSqueezeSpec, QuantizeSpec>;

void validate_defense_spec(const DefenseSpec& spec);

}  // namespace fakebob
