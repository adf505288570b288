// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace leakaudit {

inline constexpr std::uint32_t kCanonicalRate = 16000;

// Canonical mono waveform at kCanonicalRate.
struct Waveform {
  std::vector<float> samples;
  std::uint32_t sample_rate = kCanonicalRate;

  double duration_s() const {
    return sample_rate == 0
               ? 0.0
               : static_cast<double>(samples.size()) / sample_rate;
  }
};

// Decoded PCM audio at native rate, one vector per channel.
struct DecodedAudio {
  std::vector<std::vector<float>> channels;  // equal lengths
  std::uint32_t sample_rate = 0;
  std::uint32_t bits_per_sample = 0;

  std::size_t frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return sample_rate == 0 ? 0.0
                            : static_cast<double>(frames()) / sample_rate;
  }
};

// Decodes a RIFF/WAVE PCM file (8/16/24/32-bit integer or 32-bit float).
// Amplitudes are normalized to [-1, 1]. Throws DecodeError on unsupported
// codecs and on truncation (message carries the byte offset).
DecodedAudio decode_wav(const std::filesystem::path& path);
DecodedAudio decode_wav_bytes(const std::string& bytes,
                              const std::string& origin = "<memory>");

// Downmixes to mono (unweighted channel mean) and resamples to
// kCanonicalRate with a windowed-sinc polyphase resampler. Mono input
// already at the canonical rate passes through untouched. Throws
// DecodeError on zero-length input.
Waveform canonicalize(const DecodedAudio& audio);

// Resamples one mono channel from `in_rate` to `out_rate`. Output length is
// ceil(len * out_rate / in_rate). Exposed for tests.
std::vector<float> resample(const std::vector<float>& in,
                            std::uint32_t in_rate, std::uint32_t out_rate);

}  // namespace leakaudit
