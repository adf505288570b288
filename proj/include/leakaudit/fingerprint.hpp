// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "leakaudit/audio.hpp"
#include "leakaudit/manifest.hpp"

namespace leakaudit {

// All knobs of the fingerprinting front end. A built index embeds the exact
// parameters it was produced with; matching across mismatched parameters is
// refused.
struct FingerprintParams {
  std::uint32_t sample_rate = kCanonicalRate;
  std::uint32_t window = 2048;  // Hann
  std::uint32_t hop = 512;      // 32 ms at 16 kHz
  std::uint32_t neighborhood_frames = 5;
  std::uint32_t neighborhood_bins = 5;
  std::uint32_t max_peaks_per_second = 30;
  std::uint32_t min_frame_delta = 1;
  std::uint32_t max_frame_delta = 127;
  std::uint32_t max_bin_delta = 255;
  std::uint32_t fan_out = 5;
  double peak_gate_db = 20.0;      // above the percentile floor
  double floor_percentile = 0.10;  // of all spectrogram cells

  std::uint32_t bins() const { return window / 2 + 1; }
  double frames_per_second() const {
    return static_cast<double>(sample_rate) / hop;
  }
  double seconds_per_frame() const {
    return static_cast<double>(hop) / sample_rate;
  }

  bool operator==(const FingerprintParams&) const = default;
};

// Log-magnitude STFT, row-major frames x bins, dB floored at kDbFloor.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> db;  // frames * bins

  float at(std::size_t frame, std::size_t bin) const {
    return db[frame * bins + bin];
  }
};

inline constexpr float kDbFloor = -100.0f;

struct Peak {
  std::uint32_t frame = 0;
  std::uint32_t bin = 0;
  float magnitude_db = kDbFloor;
};

// One anchor/target pair packed into the low 26 bits of a 32-bit hash:
// anchor_bin (10 bits) | bin_delta (9 bits, two's complement) | frame_delta
// (7 bits). Top 6 bits are zero.
struct Landmark {
  std::uint32_t hash = 0;
  std::uint32_t anchor_frame = 0;

  bool operator==(const Landmark&) const = default;
};

std::uint32_t pack_hash(std::uint32_t anchor_bin, std::int32_t bin_delta,
                        std::uint32_t frame_delta);
struct UnpackedHash {
  std::uint32_t anchor_bin;
  std::int32_t bin_delta;
  std::uint32_t frame_delta;
  bool operator==(const UnpackedHash&) const = default;
};
UnpackedHash unpack_hash(std::uint32_t hash);

// STFT with the params' window/hop. Throws ArgumentError when the waveform
// is shorter than one window.
Spectrogram spectrogram(const Waveform& wave, const FingerprintParams& params);

// Strict local maxima over the +-neighborhood that clear the percentile
// gate, capped at max_peaks_per_second per wall-clock second. Sorted by
// (frame, bin).
std::vector<Peak> extract_peaks(const Spectrogram& spec,
                                const FingerprintParams& params);

// Pairs every anchor with its fan_out nearest subsequent peaks inside the
// target zone (nearest by frame_delta, then |bin_delta|, then bin).
std::vector<Landmark> landmarks(const std::vector<Peak>& peaks,
                                const FingerprintParams& params);

// Full front end: waveform -> landmark sequence.
struct Fingerprint {
  FingerprintParams params;
  std::vector<Landmark> landmarks;
};
Fingerprint fingerprint_waveform(const Waveform& wave,
                                 const FingerprintParams& params);

struct Posting {
  std::uint32_t ordinal = 0;
  std::uint32_t frame = 0;
  bool operator==(const Posting&) const = default;
};

struct IndexedRecording {
  std::string id;
  std::uint32_t landmark_count = 0;
  double duration_s = 0.0;
  bool operator==(const IndexedRecording&) const = default;
};

// Inverted index: 32-bit hash -> postings sorted by (ordinal, frame).
struct FingerprintIndex {
  FingerprintParams params;
  std::vector<IndexedRecording> rec_table;  // ordinal -> recording
  std::map<std::uint32_t, std::vector<Posting>> postings;

  std::size_t total_landmarks() const;
  // Per-ordinal (hash, anchor_frame) lists reconstructed from the postings;
  // used to re-query every indexed recording without re-decoding audio.
  std::vector<std::vector<Landmark>> landmarks_by_ordinal() const;

  bool operator==(const FingerprintIndex&) const = default;
};

struct SkippedRecording {
  std::string id;
  std::string reason;
};

struct IndexBuildResult {
  FingerprintIndex index;
  std::vector<SkippedRecording> skipped;
};

// Fingerprints every catalog recording with duration >= 1 s and builds the
// inverted index. Audio paths are resolved against `audio_root` when
// relative. Undecodable files are skipped and reported. Throws
// IntegrityError when nothing at all could be fingerprinted.
IndexBuildResult build_index(const Catalog& catalog,
                             const std::filesystem::path& audio_root,
                             const FingerprintParams& params,
                             unsigned threads = 1);

// Binary index file: magic "LAFP", little-endian, format version, params +
// recording table header, postings body, trailing CRC32 of the body.
void save_index(const FingerprintIndex& index,
                const std::filesystem::path& path);
FingerprintIndex load_index(const std::filesystem::path& path);

std::string index_to_bytes(const FingerprintIndex& index);
FingerprintIndex index_from_bytes(const std::string& bytes,
                                  const std::string& origin = "<memory>");

}  // namespace leakaudit
