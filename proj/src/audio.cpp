#include "audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace fakebob {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::invalid_argument: return "invalid-argument";
    case ErrorCategory::data: return "data";
    case ErrorCategory::state: return "state";
    case ErrorCategory::budget: return "budget";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

void validate_waveform(const Waveform& w) {
  require(!w.samples.empty(), ErrorCategory::invalid_argument, "waveform has no samples");
  require(w.sample_rate > 0, ErrorCategory::invalid_argument, "sample rate must be positive");
  for (double s : w.samples) {
    require(std::isfinite(s), ErrorCategory::invalid_argument, "waveform sample is not finite");
    require(s >= -1.0 && s <= 1.0, ErrorCategory::invalid_argument,
            "waveform sample outside [-1, 1]");
  }
}

namespace {

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

}  // namespace

Waveform read_wav_bytes(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 12, ErrorCategory::parse, "WAV: truncated RIFF header");
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0, ErrorCategory::parse,
          "WAV: missing RIFF magic");
  require(std::memcmp(bytes.data() + 8, "WAVE", 4) == 0, ErrorCategory::parse,
          "WAV: missing WAVE form type");

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const std::uint8_t* data_chunk = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(hdr + 4);
    pos += 8;
    require(pos + chunk_size <= bytes.size(), ErrorCategory::parse, "WAV: truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      require(chunk_size >= 16, ErrorCategory::parse, "WAV: fmt chunk too small");
      const std::uint8_t* f = bytes.data() + pos;
      format_tag = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_chunk = bytes.data() + pos;
      data_size = chunk_size;
      // fmt is expected before data in canonical files; keep scanning anyway.
    }
    pos += chunk_size + (chunk_size & 1);
  }

  require(have_fmt, ErrorCategory::parse, "WAV: missing fmt chunk");
  require(format_tag == 1, ErrorCategory::parse, "WAV: unsupported encoding (not PCM)");
  require(channels == 1, ErrorCategory::parse, "WAV: unsupported encoding (not mono)");
  require(bits == 16, ErrorCategory::parse, "WAV: unsupported encoding (not 16-bit)");
  require(sample_rate > 0, ErrorCategory::parse, "WAV: invalid sample rate");
  require(data_chunk != nullptr, ErrorCategory::parse, "WAV: missing data chunk");
  require(data_size >= 2, ErrorCategory::parse, "WAV: empty payload");
  require(data_size % 2 == 0, ErrorCategory::parse, "WAV: odd data size for 16-bit samples");

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  std::size_t n = data_size / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t v = static_cast<std::int16_t>(read_u16(data_chunk + 2 * i));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

std::vector<std::uint8_t> write_wav_bytes(const Waveform& w) {
  validate_waveform(w);
  std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (double s : w.samples) {
    long v = std::lround(s * 32767.0);
    v = std::clamp(v, -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

Waveform read_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav_bytes(bytes);
}

void write_wav_file(const Waveform& w, const std::string& path) {
  auto bytes = write_wav_bytes(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCategory::io, "failed writing " + path);
}

Waveform clip_eps(const Waveform& candidate, const Waveform& original, double epsilon) {
  require(candidate.samples.size() == original.samples.size(), ErrorCategory::invalid_argument,
          "clip_eps: length mismatch");
  require(candidate.sample_rate == original.sample_rate, ErrorCategory::invalid_argument,
          "clip_eps: sample rate mismatch");
  require(std::isfinite(epsilon) && epsilon >= 0.0, ErrorCategory::invalid_argument,
          "clip_eps: epsilon must be >= 0");
  Waveform out;
  out.sample_rate = original.sample_rate;
  out.samples.resize(original.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    double c = candidate.samples[i];
    double o = original.samples[i];
    double hi = std::min(std::min(c, 1.0), o + epsilon);
    out.samples[i] = std::max(std::max(hi, -1.0), o - epsilon);
  }
  return out;
}

SnrReport snr(const Waveform& original, const Waveform& adversarial) {
  require(original.samples.size() == adversarial.samples.size(), ErrorCategory::invalid_argument,
          "snr: length mismatch");
  double sp = 0.0, np = 0.0;
  std::size_t n = original.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    double o = original.samples[i];
    double d = adversarial.samples[i] - o;
    sp += o * o;
    np += d * d;
  }
  sp /= static_cast<double>(n);
  np /= static_cast<double>(n);
  require(np > 0.0, ErrorCategory::data, "snr: zero perturbation, SNR undefined");
  return SnrReport{10.0 * std::log10(sp / np), sp, np};
}

double linf_distance(const Waveform& a, const Waveform& b) {
  require(a.samples.size() == b.samples.size(), ErrorCategory::invalid_argument,
          "linf_distance: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    m = std::max(m, std::fabs(a.samples[i] - b.samples[i]));
  return m;
}

}  // namespace fakebob
