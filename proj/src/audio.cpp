// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"

namespace leakaudit {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;
  std::string origin;

  void need(std::size_t n, const char* what) const {
    if (pos + n > size) {
      throw DecodeError(origin + ": truncated " + what + " at byte offset " +
                        std::to_string(pos));
    }
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(data[pos]) |
                      static_cast<std::uint16_t>(data[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | data[pos + static_cast<std::size_t>(i)];
    }
    pos += 4;
    return v;
  }
  void tag(char out[4], const char* what) {
    need(4, what);
    std::memcpy(out, data + pos, 4);
    pos += 4;
  }
  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos += n;
  }
};

float clamp1(float v) { return std::clamp(v, -1.0f, 1.0f); }

}  // namespace

DecodedAudio decode_wav_bytes(const std::string& bytes,
                              const std::string& origin) {
  ByteReader r{reinterpret_cast<const std::uint8_t*>(bytes.data()),
               bytes.size(), 0, origin};
  char tag[4];
  r.tag(tag, "RIFF header");
  if (std::memcmp(tag, "RIFF", 4) != 0) {
    throw DecodeError(origin + ": not a RIFF file");
  }
  r.u32("RIFF size");
  r.tag(tag, "WAVE tag");
  if (std::memcmp(tag, "WAVE", 4) != 0) {
    throw DecodeError(origin + ": not a WAVE container");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  DecodedAudio out;

  while (r.pos < r.size) {
    if (r.size - r.pos < 8) {
      // Some writers pad with a single alignment byte; anything longer than
      // that is a broken chunk header.
      if (r.size - r.pos > 1) {
        throw DecodeError(origin + ": truncated chunk header at byte offset " +
                          std::to_string(r.pos));
      }
      break;
    }
    r.tag(tag, "chunk id");
    const std::uint32_t chunk_size = r.u32("chunk size");
    const std::size_t chunk_start = r.pos;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) {
        throw DecodeError(origin + ": fmt chunk too small");
      }
      format = r.u16("fmt");
      channels = r.u16("fmt");
      sample_rate = r.u32("fmt");
      r.u32("fmt");  // byte rate
      r.u16("fmt");  // block align
      bits = r.u16("fmt");
      if (format == kFormatExtensible) {
        if (chunk_size < 40) {
          throw DecodeError(origin + ": extensible fmt chunk too small");
        }
        r.u16("fmt");  // cbSize
        r.u16("fmt");  // valid bits
        r.u32("fmt");  // channel mask
        format = r.u16("fmt");  // first two bytes of the SubFormat GUID
        r.skip(14, "fmt");
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) {
        throw DecodeError(origin + ": data chunk before fmt chunk");
      }
      if (format != kFormatPcm && format != kFormatFloat) {
        throw DecodeError(origin + ": unsupported codec (format tag " +
                          std::to_string(format) + ")");
      }
      if (channels == 0 || sample_rate == 0) {
        throw DecodeError(origin + ": fmt chunk declares zero channels or rate");
      }
      const std::uint32_t bytes_per_sample = bits / 8;
      if (format == kFormatPcm &&
          (bits != 8 && bits != 16 && bits != 24 && bits != 32)) {
        throw DecodeError(origin + ": unsupported PCM bit depth " +
                          std::to_string(bits));
      }
      if (format == kFormatFloat && bits != 32) {
        throw DecodeError(origin + ": unsupported float bit depth " +
                          std::to_string(bits));
      }
      r.need(chunk_size, "data chunk");
      const std::uint8_t* p = r.data + r.pos;
      const std::size_t frame_bytes =
          static_cast<std::size_t>(bytes_per_sample) * channels;
      const std::size_t n_frames = chunk_size / frame_bytes;
      out.channels.assign(channels, {});
      for (auto& ch : out.channels) {
        ch.reserve(n_frames);
      }
      for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::uint16_t c = 0; c < channels; ++c) {
          const std::uint8_t* s = p + f * frame_bytes + c * bytes_per_sample;
          float v = 0.0f;
          if (format == kFormatFloat) {
            float raw;
            std::memcpy(&raw, s, 4);
            v = clamp1(std::isfinite(raw) ? raw : 0.0f);
          } else {
            switch (bits) {
              case 8:
                // 8-bit WAV is unsigned with midpoint 128.
                v = (static_cast<int>(s[0]) - 128) / 128.0f;
                break;
              case 16: {
                std::int16_t raw = static_cast<std::int16_t>(
                    s[0] | (static_cast<std::uint16_t>(s[1]) << 8));
                v = static_cast<float>(raw) / 32768.0f;
                break;
              }
              case 24: {
                std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
                if (raw & 0x800000) {
                  raw |= ~0xFFFFFF;
                }
                v = static_cast<float>(raw) / 8388608.0f;
                break;
              }
              case 32: {
                std::int32_t raw;
                std::memcpy(&raw, s, 4);
                v = static_cast<float>(raw) / 2147483648.0f;
                break;
              }
              default:
                break;
            }
          }
          out.channels[c].push_back(v);
        }
      }
      out.sample_rate = sample_rate;
      out.bits_per_sample = bits;
      return out;
    }
    // Skip unknown chunks (LIST, fact, cue, ...). Chunks are word-aligned.
    r.pos = chunk_start;
    r.skip(chunk_size, "chunk body");
    if (chunk_size % 2 == 1 && r.pos < r.size) {
      r.skip(1, "chunk padding");
    }
  }
  throw DecodeError(origin + ": no data chunk found");
}

DecodedAudio decode_wav(const std::filesystem::path& path) {
  return decode_wav_bytes(read_file(path), path.string());
}

namespace {

// Windowed-sinc polyphase resampler. The rational ratio out/in is reduced to
// L/M; output sample n sits at input position n*M/L, which takes only L
// distinct fractional phases, so per-phase tap rows are precomputed. Each
// row is normalized to unit DC gain.
class PolyphaseResampler {
 public:
  PolyphaseResampler(std::uint32_t in_rate, std::uint32_t out_rate) {
    const std::uint32_t g = std::gcd(in_rate, out_rate);
    up_ = out_rate / g;
    down_ = in_rate / g;
    const double cutoff =
        std::min(1.0, static_cast<double>(out_rate) / in_rate);
    taps_.assign(static_cast<std::size_t>(up_) * kTaps, 0.0);
    for (std::uint32_t phase = 0; phase < up_; ++phase) {
      // Output n lands at input position (n*down)/up; its fractional part is
      // ((n*down) mod up)/up, i.e. phase/up.
      const double frac = static_cast<double>(phase) / up_;
      double sum = 0.0;
      for (int j = 0; j < kTaps; ++j) {
        const int k = j - kHalf + 1;  // input index offset from floor(t)
        const double u = frac - k;
        const double w = hann_window(u);
        const double h = cutoff * sinc(cutoff * u) * w;
        taps_[static_cast<std::size_t>(phase) * kTaps + j] = h;
        sum += h;
      }
      if (sum != 0.0) {
        for (int j = 0; j < kTaps; ++j) {
          taps_[static_cast<std::size_t>(phase) * kTaps + j] /= sum;
        }
      }
    }
  }

  std::vector<float> run(const std::vector<float>& in) const {
    const std::size_t out_len =
        (in.size() * up_ + down_ - 1) / down_;  // ceil
    std::vector<float> out(out_len);
    const auto n_in = static_cast<std::int64_t>(in.size());
    for (std::size_t n = 0; n < out_len; ++n) {
      const std::uint64_t num = static_cast<std::uint64_t>(n) * down_;
      const auto base = static_cast<std::int64_t>(num / up_);
      const auto phase = static_cast<std::uint32_t>(num % up_);
      const double* h = taps_.data() + static_cast<std::size_t>(phase) * kTaps;
      double acc = 0.0;
      for (int j = 0; j < kTaps; ++j) {
        const std::int64_t k = base + j - kHalf + 1;
        if (k >= 0 && k < n_in) {
          acc += h[j] * in[static_cast<std::size_t>(k)];
        }
      }
      out[n] = clamp1(static_cast<float>(acc));
    }
    return out;
  }

 private:
  static constexpr int kHalf = 12;
  static constexpr int kTaps = 2 * kHalf;

  static double sinc(double x) {
    if (x == 0.0) {
      return 1.0;
    }
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
  }
  static double hann_window(double u) {
    const double x = u / kHalf;
    if (x <= -1.0 || x >= 1.0) {
      return 0.0;
    }
    return 0.5 * (1.0 + std::cos(std::numbers::pi * x));
  }

  std::uint32_t up_ = 1;
  std::uint32_t down_ = 1;
  std::vector<double> taps_;
};

}  // namespace

std::vector<float> resample(const std::vector<float>& in,
                            std::uint32_t in_rate, std::uint32_t out_rate) {
  if (in_rate == out_rate) {
    return in;
  }
  return PolyphaseResampler(in_rate, out_rate).run(in);
}

Waveform canonicalize(const DecodedAudio& audio) {
  if (audio.channels.empty() || audio.frames() == 0) {
    throw DecodeError("empty audio: no samples to canonicalize");
  }
  if (audio.sample_rate == 0) {
    throw DecodeError("empty audio: sample rate is zero");
  }
  Waveform wave;
  wave.sample_rate = kCanonicalRate;
  if (audio.channels.size() == 1 && audio.sample_rate == kCanonicalRate) {
    wave.samples = audio.channels.front();
    return wave;
  }
  std::vector<float> mono;
  if (audio.channels.size() == 1) {
    mono = audio.channels.front();
  } else {
    const std::size_t n = audio.frames();
    mono.resize(n);
    const double scale = 1.0 / static_cast<double>(audio.channels.size());
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& ch : audio.channels) {
        acc += ch[i];
      }
      mono[i] = static_cast<float>(acc * scale);
    }
  }
  wave.samples = audio.sample_rate == kCanonicalRate
                     ? std::move(mono)
                     : resample(mono, audio.sample_rate, kCanonicalRate);
  return wave;
}

}  // namespace leakaudit
