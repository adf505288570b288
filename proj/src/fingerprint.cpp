// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/fingerprint.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <deque>
#include <mutex>
#include <numbers>
#include <thread>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"

namespace leakaudit {

namespace {

constexpr std::uint32_t kAnchorBinMax = 0x3FF;  // 10 bits

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// One FFTW real-to-complex transform with a periodic Hann window. Not
// thread-safe; each worker owns an instance.
class Stft {
 public:
  explicit Stft(std::uint32_t window) : window_(window) {
    hann_.resize(window_);
    for (std::uint32_t n = 0; n < window_; ++n) {
      hann_[n] =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / window_));
    }
    std::lock_guard<std::mutex> lock(planner_mutex());
    in_ = fftw_alloc_real(window_);
    out_ = fftw_alloc_complex(window_ / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(window_), in_, out_,
                                 FFTW_ESTIMATE);
  }
  ~Stft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Stft(const Stft&) = delete;
  Stft& operator=(const Stft&) = delete;

  void transform(const float* samples, float* out_db) {
    for (std::uint32_t n = 0; n < window_; ++n) {
      in_[n] = hann_[n] * samples[n];
    }
    fftw_execute(plan_);
    const std::uint32_t bins = window_ / 2 + 1;
    for (std::uint32_t k = 0; k < bins; ++k) {
      const double mag = std::hypot(out_[k][0], out_[k][1]);
      out_db[k] =
          mag > 0.0
              ? std::max(kDbFloor, static_cast<float>(20.0 * std::log10(mag)))
              : kDbFloor;
    }
  }

 private:
  std::uint32_t window_;
  std::vector<double> hann_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

// Sliding-window maximum (monotonic deque), window [i-radius, i+radius]
// clipped to the row. `stride` walks rows or columns of the same buffer.
void sliding_max(const float* src, float* dst, std::size_t n,
                 std::size_t stride, std::size_t radius) {
  std::deque<std::size_t> q;
  std::size_t next = 0;  // next index to push
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n - 1, i + radius);
    while (next <= hi) {
      const float v = src[next * stride];
      while (!q.empty() && src[q.back() * stride] <= v) {
        q.pop_back();
      }
      q.push_back(next);
      ++next;
    }
    while (q.front() + radius < i) {
      q.pop_front();
    }
    dst[i * stride] = src[q.front() * stride];
  }
}

}  // namespace

std::uint32_t pack_hash(std::uint32_t anchor_bin, std::int32_t bin_delta,
                        std::uint32_t frame_delta) {
  if (anchor_bin > kAnchorBinMax) {
    throw ArgumentError("anchor_bin out of range: " +
                        std::to_string(anchor_bin));
  }
  if (bin_delta < -255 || bin_delta > 255) {
    throw ArgumentError("bin_delta out of range: " + std::to_string(bin_delta));
  }
  if (frame_delta < 1 || frame_delta > 127) {
    throw ArgumentError("frame_delta out of range: " +
                        std::to_string(frame_delta));
  }
  return (anchor_bin << 16) |
         ((static_cast<std::uint32_t>(bin_delta) & 0x1FFu) << 7) |
         (frame_delta & 0x7Fu);
}

UnpackedHash unpack_hash(std::uint32_t hash) {
  UnpackedHash u;
  u.anchor_bin = (hash >> 16) & 0x3FFu;
  std::uint32_t bd = (hash >> 7) & 0x1FFu;
  if (bd & 0x100u) {
    bd |= ~0x1FFu;  // sign-extend 9 bits
  }
  u.bin_delta = static_cast<std::int32_t>(bd);
  u.frame_delta = hash & 0x7Fu;
  return u;
}

Spectrogram spectrogram(const Waveform& wave,
                        const FingerprintParams& params) {
  if (wave.samples.size() < params.window) {
    throw ArgumentError("waveform too short for spectrogram: " +
                        std::to_string(wave.samples.size()) + " samples < " +
                        std::to_string(params.window) + " window");
  }
  Stft stft(params.window);
  Spectrogram spec;
  spec.bins = params.bins();
  spec.frames = (wave.samples.size() - params.window) / params.hop + 1;
  spec.db.resize(spec.frames * spec.bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    stft.transform(wave.samples.data() + t * params.hop,
                   spec.db.data() + t * spec.bins);
  }
  return spec;
}

std::vector<Peak> extract_peaks(const Spectrogram& spec,
                                const FingerprintParams& params) {
  if (spec.frames == 0 || spec.bins == 0) {
    return {};
  }
  // Percentile floor over all cells (value at rank floor(p * (n - 1))).
  std::vector<float> cells = spec.db;
  const std::size_t rank = static_cast<std::size_t>(
      params.floor_percentile * static_cast<double>(cells.size() - 1));
  std::nth_element(cells.begin(), cells.begin() + rank, cells.end());
  const float gate =
      cells[rank] + static_cast<float>(params.peak_gate_db);

  // Box dilation: per-frame pass over bins, then per-bin pass over frames.
  std::vector<float> tmp(spec.db.size());
  std::vector<float> dilated(spec.db.size());
  for (std::size_t t = 0; t < spec.frames; ++t) {
    sliding_max(spec.db.data() + t * spec.bins, tmp.data() + t * spec.bins,
                spec.bins, 1, params.neighborhood_bins);
  }
  for (std::size_t b = 0; b < spec.bins; ++b) {
    sliding_max(tmp.data() + b, dilated.data() + b, spec.frames, spec.bins,
                params.neighborhood_frames);
  }

  const auto nf = static_cast<std::int64_t>(params.neighborhood_frames);
  const auto nb = static_cast<std::int64_t>(params.neighborhood_bins);
  std::vector<Peak> peaks;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t b = 0; b < spec.bins; ++b) {
      const float v = spec.at(t, b);
      if (v < gate || v != dilated[t * spec.bins + b]) {
        continue;
      }
      // v equals the box maximum; confirm it is a strict maximum (a plateau
      // yields no peak).
      bool strict = true;
      for (std::int64_t df = -nf; df <= nf && strict; ++df) {
        const std::int64_t tf = static_cast<std::int64_t>(t) + df;
        if (tf < 0 || tf >= static_cast<std::int64_t>(spec.frames)) {
          continue;
        }
        for (std::int64_t dbn = -nb; dbn <= nb; ++dbn) {
          if (df == 0 && dbn == 0) {
            continue;
          }
          const std::int64_t tb = static_cast<std::int64_t>(b) + dbn;
          if (tb < 0 || tb >= static_cast<std::int64_t>(spec.bins)) {
            continue;
          }
          if (spec.at(static_cast<std::size_t>(tf),
                      static_cast<std::size_t>(tb)) >= v) {
            strict = false;
            break;
          }
        }
      }
      if (strict) {
        peaks.push_back(Peak{static_cast<std::uint32_t>(t),
                             static_cast<std::uint32_t>(b), v});
      }
    }
  }

  // Cap per wall-clock second: keep the strongest max_peaks_per_second.
  std::map<std::uint64_t, std::vector<Peak>> by_second;
  for (const Peak& p : peaks) {
    const std::uint64_t sec =
        static_cast<std::uint64_t>(p.frame) * params.hop / params.sample_rate;
    by_second[sec].push_back(p);
  }
  std::vector<Peak> kept;
  kept.reserve(peaks.size());
  for (auto& [sec, group] : by_second) {
    if (group.size() > params.max_peaks_per_second) {
      std::sort(group.begin(), group.end(), [](const Peak& a, const Peak& b) {
        if (a.magnitude_db != b.magnitude_db) {
          return a.magnitude_db > b.magnitude_db;
        }
        return std::pair(a.frame, a.bin) < std::pair(b.frame, b.bin);
      });
      group.resize(params.max_peaks_per_second);
    }
    kept.insert(kept.end(), group.begin(), group.end());
  }
  std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) {
    return std::pair(a.frame, a.bin) < std::pair(b.frame, b.bin);
  });
  return kept;
}

std::vector<Landmark> landmarks(const std::vector<Peak>& peaks,
                                const FingerprintParams& params) {
  std::vector<Landmark> out;
  struct Candidate {
    std::uint32_t frame_delta;
    std::uint32_t abs_bin_delta;
    std::uint32_t bin;
    std::int32_t bin_delta;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const Peak& anchor = peaks[i];
    if (anchor.bin > kAnchorBinMax) {
      continue;  // the Nyquist bin cannot be packed as an anchor
    }
    cands.clear();
    for (std::size_t j = i + 1; j < peaks.size(); ++j) {
      const std::uint32_t fd = peaks[j].frame - anchor.frame;
      if (fd > params.max_frame_delta) {
        break;  // peaks sorted by frame
      }
      if (fd < params.min_frame_delta) {
        continue;
      }
      const std::int32_t bd = static_cast<std::int32_t>(peaks[j].bin) -
                              static_cast<std::int32_t>(anchor.bin);
      const auto abd = static_cast<std::uint32_t>(bd < 0 ? -bd : bd);
      if (abd > params.max_bin_delta) {
        continue;
      }
      cands.push_back(Candidate{fd, abd, peaks[j].bin, bd});
    }
    const std::size_t take =
        std::min<std::size_t>(params.fan_out, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + take, cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return std::tie(a.frame_delta, a.abs_bin_delta, a.bin) <
                               std::tie(b.frame_delta, b.abs_bin_delta, b.bin);
                      });
    for (std::size_t k = 0; k < take; ++k) {
      out.push_back(Landmark{
          pack_hash(anchor.bin, cands[k].bin_delta, cands[k].frame_delta),
          anchor.frame});
    }
  }
  return out;
}

Fingerprint fingerprint_waveform(const Waveform& wave,
                                 const FingerprintParams& params) {
  Fingerprint fp;
  fp.params = params;
  fp.landmarks = landmarks(extract_peaks(spectrogram(wave, params), params),
                           params);
  return fp;
}

std::size_t FingerprintIndex::total_landmarks() const {
  std::size_t n = 0;
  for (const auto& [hash, posts] : postings) {
    n += posts.size();
  }
  return n;
}

std::vector<std::vector<Landmark>> FingerprintIndex::landmarks_by_ordinal()
    const {
  std::vector<std::vector<Landmark>> per_rec(rec_table.size());
  for (std::size_t i = 0; i < rec_table.size(); ++i) {
    per_rec[i].reserve(rec_table[i].landmark_count);
  }
  for (const auto& [hash, posts] : postings) {
    for (const Posting& p : posts) {
      per_rec.at(p.ordinal).push_back(Landmark{hash, p.frame});
    }
  }
  return per_rec;
}

namespace {

struct RecordingResult {
  bool included = false;
  std::string skip_reason;
  std::vector<Landmark> lms;
  double duration_s = 0.0;
};

RecordingResult fingerprint_one(const Recording& rec,
                                const std::filesystem::path& audio_root,
                                const FingerprintParams& params) {
  RecordingResult result;
  try {
    std::filesystem::path p(rec.audio_path);
    if (p.is_relative()) {
      p = audio_root / p;
    }
    const Waveform wave = canonicalize(decode_wav(p));
    result.duration_s = wave.duration_s();
    if (result.duration_s < 1.0) {
      result.skip_reason = "duration " + std::to_string(result.duration_s) +
                           " s below the 1 s minimum";
      return result;
    }
    result.lms = fingerprint_waveform(wave, params).landmarks;
    result.included = true;
  } catch (const Error& e) {
    result.skip_reason = e.what();
  }
  return result;
}

}  // namespace

IndexBuildResult build_index(const Catalog& catalog,
                             const std::filesystem::path& audio_root,
                             const FingerprintParams& params,
                             unsigned threads) {
  std::vector<RecordingResult> results(catalog.size());
  if (threads <= 1 || catalog.size() <= 1) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      results[i] = fingerprint_one(catalog.at(i), audio_root, params);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= catalog.size()) {
          return;
        }
        results[i] = fingerprint_one(catalog.at(i), audio_root, params);
      }
    };
    std::vector<std::thread> pool;
    const unsigned n =
        std::min<unsigned>(threads, static_cast<unsigned>(catalog.size()));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  IndexBuildResult out;
  out.index.params = params;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    RecordingResult& r = results[i];
    const std::string& id = catalog.at(i).id;
    if (!r.included) {
      out.skipped.push_back(SkippedRecording{id, r.skip_reason});
      continue;
    }
    const auto ordinal = static_cast<std::uint32_t>(out.index.rec_table.size());
    out.index.rec_table.push_back(IndexedRecording{
        id, static_cast<std::uint32_t>(r.lms.size()), r.duration_s});
    for (const Landmark& lm : r.lms) {
      out.index.postings[lm.hash].push_back(Posting{ordinal, lm.anchor_frame});
    }
  }
  if (out.index.rec_table.empty()) {
    throw IntegrityError("empty index: no recording could be fingerprinted");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Index file format. Little-endian throughout.
//
//   "LAFP"  magic
//   u16     format version (1)
//   u16     reserved (0)
//   params: 10 x u32, 2 x f64 (field order as in FingerprintParams)
//   u32     recording count
//   per recording: u16 id length, id bytes, u32 landmark count, f64 duration
//   u32     distinct hash count
//   body:   per hash ascending: u32 hash, u32 count,
//           count x (u32 ordinal, u32 frame)
//   u32     CRC32 of the body bytes
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'L', 'A', 'F', 'P'};
constexpr std::uint16_t kFormatVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}
void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

struct IndexReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;
  std::string origin;

  void need(std::size_t n) const {
    if (pos + n > size) {
      throw FormatError(origin + ": index file truncated at byte " +
                        std::to_string(pos));
    }
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data[pos]) |
                      static_cast<std::uint16_t>(data[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | data[pos + static_cast<std::size_t>(i)];
    }
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
      bits = (bits << 8) | data[pos + static_cast<std::size_t>(i)];
    }
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
};

void put_params(std::string& out, const FingerprintParams& p) {
  put_u32(out, p.sample_rate);
  put_u32(out, p.window);
  put_u32(out, p.hop);
  put_u32(out, p.neighborhood_frames);
  put_u32(out, p.neighborhood_bins);
  put_u32(out, p.max_peaks_per_second);
  put_u32(out, p.min_frame_delta);
  put_u32(out, p.max_frame_delta);
  put_u32(out, p.max_bin_delta);
  put_u32(out, p.fan_out);
  put_f64(out, p.peak_gate_db);
  put_f64(out, p.floor_percentile);
}

FingerprintParams read_params(IndexReader& r) {
  FingerprintParams p;
  p.sample_rate = r.u32();
  p.window = r.u32();
  p.hop = r.u32();
  p.neighborhood_frames = r.u32();
  p.neighborhood_bins = r.u32();
  p.max_peaks_per_second = r.u32();
  p.min_frame_delta = r.u32();
  p.max_frame_delta = r.u32();
  p.max_bin_delta = r.u32();
  p.fan_out = r.u32();
  p.peak_gate_db = r.f64();
  p.floor_percentile = r.f64();
  return p;
}

}  // namespace

std::string index_to_bytes(const FingerprintIndex& index) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kFormatVersion);
  put_u16(out, 0);
  put_params(out, index.params);
  put_u32(out, static_cast<std::uint32_t>(index.rec_table.size()));
  for (const IndexedRecording& rec : index.rec_table) {
    if (rec.id.size() > 0xFFFF) {
      throw ArgumentError("recording id longer than 65535 bytes");
    }
    put_u16(out, static_cast<std::uint16_t>(rec.id.size()));
    out += rec.id;
    put_u32(out, rec.landmark_count);
    put_f64(out, rec.duration_s);
  }
  put_u32(out, static_cast<std::uint32_t>(index.postings.size()));
  std::string body;
  for (const auto& [hash, posts] : index.postings) {
    put_u32(body, hash);
    put_u32(body, static_cast<std::uint32_t>(posts.size()));
    for (const Posting& p : posts) {
      put_u32(body, p.ordinal);
      put_u32(body, p.frame);
    }
  }
  out += body;
  put_u32(out, crc32_of(body.data(), body.size()));
  return out;
}

FingerprintIndex index_from_bytes(const std::string& bytes,
                                  const std::string& origin) {
  IndexReader r{reinterpret_cast<const std::uint8_t*>(bytes.data()),
                bytes.size(), 0, origin};
  r.need(4);
  if (std::memcmp(r.data, kMagic, 4) != 0) {
    throw FormatError(origin + ": not a LAFP index file (bad magic)");
  }
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw FormatError(origin + ": incompatible index format version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kFormatVersion) + ")");
  }
  r.u16();  // reserved
  FingerprintIndex index;
  index.params = read_params(r);
  const std::uint32_t rec_count = r.u32();
  index.rec_table.reserve(rec_count);
  for (std::uint32_t i = 0; i < rec_count; ++i) {
    IndexedRecording rec;
    rec.id = r.str(r.u16());
    rec.landmark_count = r.u32();
    rec.duration_s = r.f64();
    index.rec_table.push_back(std::move(rec));
  }
  const std::uint32_t hash_count = r.u32();
  const std::size_t body_start = r.pos;
  std::uint32_t prev_hash = 0;
  for (std::uint32_t h = 0; h < hash_count; ++h) {
    const std::uint32_t hash = r.u32();
    if (h > 0 && hash <= prev_hash) {
      throw FormatError(origin + ": posting hashes not strictly ascending");
    }
    prev_hash = hash;
    const std::uint32_t count = r.u32();
    auto& posts = index.postings[hash];
    posts.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      Posting p;
      p.ordinal = r.u32();
      p.frame = r.u32();
      if (p.ordinal >= rec_count) {
        throw FormatError(origin + ": posting ordinal " +
                          std::to_string(p.ordinal) + " out of range");
      }
      posts.push_back(p);
    }
  }
  const std::size_t body_end = r.pos;
  const std::uint32_t stored_crc = r.u32();
  if (r.pos != r.size) {
    throw FormatError(origin + ": trailing bytes after checksum");
  }
  const std::uint32_t actual_crc =
      crc32_of(bytes.data() + body_start, body_end - body_start);
  if (actual_crc != stored_crc) {
    throw FormatError(origin + ": body checksum mismatch (file corrupt)");
  }
  return index;
}

void save_index(const FingerprintIndex& index,
                const std::filesystem::path& path) {
  atomic_write(path, index_to_bytes(index));
}

FingerprintIndex load_index(const std::filesystem::path& path) {
  return index_from_bytes(read_file(path), path.string());
}

}  // namespace leakaudit
