#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"

namespace fakebob {

// Iterative radix-2 FFT with tables precomputed at construction, so one
// instance can be reused across the frames of an utterance.
class Fft {
 public:
  explicit Fft(int n) : n_(n) {
    require(n >= 2 && (n & (n - 1)) == 0, ErrorCategory::invalid_argument,
            "FFT size must be a power of two >= 2");
    rev_.resize(static_cast<std::size_t>(n));
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < bits; ++b)
        if (i & (1 << b)) r |= 1 << (bits - 1 - b);
      rev_[static_cast<std::size_t>(i)] = r;
    }
    cos_.resize(static_cast<std::size_t>(n / 2));
    sin_.resize(static_cast<std::size_t>(n / 2));
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < n / 2; ++i) {
      cos_[static_cast<std::size_t>(i)] = std::cos(-two_pi * i / n);
      sin_[static_cast<std::size_t>(i)] = std::sin(-two_pi * i / n);
    }
  }

  int size() const { return n_; }

  // In-place forward transform of (re, im), both of length n.
  void transform(double* re, double* im) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
      int j = rev_[static_cast<std::size_t>(i)];
      if (i < j) {
        std::swap(re[i], re[j]);
        std::swap(im[i], im[j]);
      }
    }
    for (int len = 2; len <= n; len <<= 1) {
      int half = len >> 1;
      int table_step = n / len;
      for (int start = 0; start < n; start += len) {
        for (int k = 0; k < half; ++k) {
          double wr = cos_[static_cast<std::size_t>(k * table_step)];
          double wi = sin_[static_cast<std::size_t>(k * table_step)];
          int a = start + k;
          int b = a + half;
          double tr = re[b] * wr - im[b] * wi;
          double ti = re[b] * wi + im[b] * wr;
          re[b] = re[a] - tr;
          im[b] = im[a] - ti;
          re[a] += tr;
          im[a] += ti;
        }
      }
    }
  }

 private:
  int n_;
  std::vector<int> rev_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

}  // namespace fakebob
