// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakaudit/fingerprint.hpp"

namespace leakaudit {

// One sub-fingerprint collision between a probe and an indexed recording.
struct RawHit {
  std::string query_id;
  std::string candidate_id;
  std::int32_t offset_frames = 0;  // candidate_frame - query_frame
  std::uint32_t query_frame = 0;
};

// Offset/frame pair of a single hit; the scoring core works on these.
struct HitEvent {
  std::int32_t offset_frames = 0;
  std::uint32_t query_frame = 0;
};

// A scored alignment between two recordings.
struct MatchCandidate {
  std::string id_a;  // id_a < id_b
  std::string id_b;
  std::uint32_t score = 0;  // offset-consistent matched landmark count
  std::int32_t best_offset_frames = 0;
  double match_duration_s = 0.0;   // query-side span of matched landmarks
  std::uint32_t matched_seconds = 0;  // distinct 1 s bins with >= 1 match
  double coverage = 0.0;           // matched_seconds / max(duration, 1)
};

// An accepted pair. `offset_s` is best_offset_frames in seconds: where the
// smaller id's content starts inside the larger id's timeline.
struct DuplicatePair {
  std::string a;  // a < b
  std::string b;
  std::uint32_t score = 0;
  double coverage = 0.0;
  std::int32_t best_offset_frames = 0;
  double offset_s = 0.0;

  bool operator==(const DuplicatePair&) const = default;
};

struct MatcherParams {
  std::uint32_t min_score = 25;
  double min_coverage = 0.5;
};

// All collisions of `probe` against the index, excluding probe_id's own
// postings. Throws ArgumentError when the probe was built with different
// fingerprint params than the index.
std::vector<RawHit> query(const FingerprintIndex& index,
                          const Fingerprint& probe,
                          const std::string& probe_id);

// Scores the hits of one (query, candidate) pair: histogram by offset,
// merge +-1-frame bins, argmax (ties toward the smallest |offset|, then the
// smaller offset). Requires at least one hit.
MatchCandidate score_candidate(const std::string& id_a, const std::string& id_b,
                               const std::vector<HitEvent>& hits,
                               const FingerprintParams& params);

// The acceptance filter: score >= min_score AND coverage strictly above
// min_coverage.
bool accept_pair(const MatchCandidate& mc, const MatcherParams& params = {});

// Queries every indexed recording against the index, scores each unordered
// pair once (the lexicographically smaller id acts as query), filters with
// accept_pair, and returns pairs sorted by (a, b).
std::vector<DuplicatePair> find_duplicates(const FingerprintIndex& index,
                                           const MatcherParams& params = {},
                                           unsigned threads = 1);

// pairs.jsonl serialization: one {"a","b","score","coverage","offset_s"}
// object per line, a < b.
std::string pairs_to_jsonl(const std::vector<DuplicatePair>& pairs);
std::vector<DuplicatePair> pairs_from_jsonl(const std::string& text,
                                            const std::string& origin =
                                                "<memory>");

}  // namespace leakaudit
