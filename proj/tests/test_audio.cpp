#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "audio.hpp"
#include "error.hpp"
#include "rng.hpp"

using namespace fakebob;

namespace {

Waveform make_wave(std::vector<double> samples, int rate = 16000) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = rate;
  return w;
}

Waveform random_wave(Rng& rng, std::size_t n, double amp = 1.0) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.uniform(-amp, amp);
  return w;
}

}  // namespace

TEST_CASE("wav read normalizes int16 by 32768") {
  Waveform w = make_wave({1.0, 0.0, -1.0});
  auto bytes = write_wav_bytes(w);
  Waveform back = read_wav_bytes(bytes);
  CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
  CHECK(back.samples[1] == 0.0);
  CHECK(back.samples[2] == doctest::Approx(-32767.0 / 32768.0).epsilon(1e-12));
  CHECK(back.sample_rate == 16000);
}

TEST_CASE("wav write maps amplitude 1.0 to 32767 and -1.0 to -32767") {
  auto bytes = write_wav_bytes(make_wave({1.0, -1.0, 0.0}));
  // Data starts at byte 44 in the canonical header layout.
  auto sample_at = [&](std::size_t i) {
    return static_cast<std::int16_t>(bytes[44 + 2 * i] | (bytes[45 + 2 * i] << 8));
  };
  CHECK(sample_at(0) == 32767);
  CHECK(sample_at(1) == -32767);
  CHECK(sample_at(2) == 0);
}

TEST_CASE("silence writes an all-zero payload") {
  auto bytes = write_wav_bytes(make_wave(std::vector<double>(64, 0.0)));
  for (std::size_t i = 44; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("wav round-trip stays within the quantization bound") {
  // With the asymmetric convention (write x32767, read /32768) the per-sample
  // error is |t + 32767*(t - round(t))| / (32767*32768) for t = 32767*a,
  // which reaches 1.5/32768 near full scale and 1/32768 for |a| <= 0.5.
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    Waveform w = random_wave(rng, 200);
    Waveform back = read_wav_bytes(write_wav_bytes(w));
    REQUIRE(back.samples.size() == w.samples.size());
    CHECK(linf_distance(w, back) <= 1.5 / 32768.0 + 1e-12);
  }
  for (int rep = 0; rep < 50; ++rep) {
    Waveform w = random_wave(rng, 200, 0.5);
    Waveform back = read_wav_bytes(write_wav_bytes(w));
    CHECK(linf_distance(w, back) <= 1.0 / 32768.0 + 1e-12);
  }
}

TEST_CASE("wav rejects malformed and unsupported input") {
  Waveform w = make_wave({0.5, -0.5});
  auto bytes = write_wav_bytes(w);

  SUBCASE("truncated header") {
    std::vector<std::uint8_t> bad(bytes.begin(), bytes.begin() + 8);
    CHECK_THROWS_AS(read_wav_bytes(bad), Error);
  }
  SUBCASE("wrong magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(read_wav_bytes(bad), Error);
  }
  SUBCASE("stereo rejected") {
    auto bad = bytes;
    bad[22] = 2;  // channel count
    CHECK_THROWS_WITH_AS(read_wav_bytes(bad), doctest::Contains("mono"), Error);
  }
  SUBCASE("float format rejected") {
    auto bad = bytes;
    bad[20] = 3;  // IEEE float tag
    CHECK_THROWS_WITH_AS(read_wav_bytes(bad), doctest::Contains("PCM"), Error);
  }
  SUBCASE("8-bit rejected") {
    auto bad = bytes;
    bad[34] = 8;
    CHECK_THROWS_AS(read_wav_bytes(bad), Error);
  }
  SUBCASE("empty payload rejected") {
    auto empty = write_wav_bytes(make_wave({0.0}));
    // Zero out the data chunk size and drop the payload.
    std::vector<std::uint8_t> bad(empty.begin(), empty.begin() + 44);
    bad[40] = bad[41] = bad[42] = bad[43] = 0;
    bad[4] = 36;
    CHECK_THROWS_AS(read_wav_bytes(bad), Error);
  }
}

TEST_CASE("clip_eps formula cases") {
  Waveform original = make_wave({0.9, 0.999, 0.0});
  Waveform candidate = make_wave({1.5, 1.2, 0.0});
  Waveform clipped = clip_eps(candidate, original, 0.05);
  CHECK(clipped.samples[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(clipped.samples[1] == 1.0);  // validity bound binds before the ball
  CHECK(clipped.samples[2] == 0.0);
}

TEST_CASE("clip_eps is the identity inside the ball") {
  Rng rng(3);
  Waveform original = random_wave(rng, 100, 0.9);
  for (double eps : {0.001, 0.01, 0.1}) {
    Waveform same = clip_eps(original, original, eps);
    CHECK(same.samples == original.samples);
  }
}

TEST_CASE("clip_eps idempotence and distance bound") {
  Rng rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    Waveform original = random_wave(rng, 64);
    Waveform candidate = random_wave(rng, 64);
    double eps = rng.uniform(0.0, 0.3);
    Waveform once = clip_eps(candidate, original, eps);
    Waveform twice = clip_eps(once, original, eps);
    CHECK(once.samples == twice.samples);
    CHECK(linf_distance(once, original) <= eps + 1e-15);
    for (double s : once.samples) {
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("clip_eps rejects length mismatch") {
  CHECK_THROWS_AS(clip_eps(make_wave({0.0, 0.1}), make_wave({0.0}), 0.1), Error);
}

TEST_CASE("snr formula cases") {
  SUBCASE("unit square wave with constant 0.1 delta gives 20 dB") {
    std::vector<double> orig(100), adv(100);
    for (std::size_t i = 0; i < 100; ++i) {
      orig[i] = (i % 2 == 0) ? 1.0 : -1.0;
      adv[i] = orig[i] + 0.1;  // P_x = 1, P_delta = 0.01
    }
    SnrReport rep = snr(make_wave(orig), make_wave(adv));
    CHECK(rep.signal_power == doctest::Approx(1.0));
    CHECK(rep.noise_power == doctest::Approx(0.01));
    CHECK(rep.snr_db == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("doubling the perturbation costs 10*log10(4) dB") {
    Rng rng(5);
    Waveform orig = random_wave(rng, 256, 0.4);
    Waveform adv1 = orig, adv2 = orig;
    for (std::size_t i = 0; i < orig.samples.size(); ++i) {
      double d = rng.uniform(-0.05, 0.05);
      adv1.samples[i] += d;
      adv2.samples[i] += 2.0 * d;
    }
    double drop = snr(orig, adv1).snr_db - snr(orig, adv2).snr_db;
    CHECK(drop == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-9));
  }
  SUBCASE("zero perturbation is an error") {
    Waveform w = make_wave({0.3, -0.3});
    CHECK_THROWS_AS(snr(w, w), Error);
  }
}

TEST_CASE("linf_distance") {
  Waveform a = make_wave({0.1, 0.2, 0.3});
  CHECK(linf_distance(a, a) == 0.0);
  Waveform b = a;
  b.samples[1] += 0.003;
  CHECK(linf_distance(a, b) == doctest::Approx(0.003).epsilon(1e-12));

  // brute-force oracle on random pairs
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Waveform x = random_wave(rng, 50);
    Waveform y = random_wave(rng, 50);
    double expect = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
      expect = std::max(expect, std::fabs(x.samples[i] - y.samples[i]));
    CHECK(linf_distance(x, y) == expect);
  }
}

TEST_CASE("waveform invariants are enforced") {
  CHECK_THROWS_AS(validate_waveform(make_wave({})), Error);
  CHECK_THROWS_AS(validate_waveform(make_wave({1.5})), Error);
  CHECK_THROWS_AS(validate_waveform(make_wave({std::nan("")})), Error);
  CHECK_NOTHROW(validate_waveform(make_wave({0.0, 1.0, -1.0})));
}
