// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/matcher.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>
#include <unordered_map>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"

namespace leakaudit {

using nlohmann::json;

std::vector<RawHit> query(const FingerprintIndex& index,
                          const Fingerprint& probe,
                          const std::string& probe_id) {
  if (!(probe.params == index.params)) {
    throw ArgumentError(
        "fingerprint params mismatch: probe was built with different "
        "parameters than the index; rebuild one side");
  }
  std::vector<RawHit> hits;
  for (const Landmark& lm : probe.landmarks) {
    auto it = index.postings.find(lm.hash);
    if (it == index.postings.end()) {
      continue;
    }
    for (const Posting& p : it->second) {
      const std::string& cand = index.rec_table[p.ordinal].id;
      if (cand == probe_id) {
        continue;
      }
      hits.push_back(RawHit{
          probe_id, cand,
          static_cast<std::int32_t>(p.frame) -
              static_cast<std::int32_t>(lm.anchor_frame),
          lm.anchor_frame});
    }
  }
  return hits;
}

MatchCandidate score_candidate(const std::string& id_a, const std::string& id_b,
                               const std::vector<HitEvent>& hits,
                               const FingerprintParams& params) {
  if (hits.empty()) {
    throw ArgumentError("score_candidate requires at least one hit");
  }
  // Histogram by offset, then evaluate every center within +-1 of a
  // populated bin; merged count of center c is hist[c-1]+hist[c]+hist[c+1].
  std::map<std::int32_t, std::uint32_t> hist;
  for (const HitEvent& h : hits) {
    ++hist[h.offset_frames];
  }
  auto count_at = [&hist](std::int32_t o) -> std::uint32_t {
    auto it = hist.find(o);
    return it == hist.end() ? 0u : it->second;
  };
  bool have_best = false;
  std::int32_t best_offset = 0;
  std::uint32_t best_count = 0;
  auto better = [](std::int32_t cand, std::int32_t best) {
    const auto ac = std::abs(static_cast<std::int64_t>(cand));
    const auto ab = std::abs(static_cast<std::int64_t>(best));
    return ac != ab ? ac < ab : cand < best;
  };
  for (const auto& [offset, n] : hist) {
    for (std::int32_t c = offset - 1; c <= offset + 1; ++c) {
      const std::uint32_t merged =
          count_at(c - 1) + count_at(c) + count_at(c + 1);
      if (!have_best || merged > best_count ||
          (merged == best_count && better(c, best_offset))) {
        have_best = true;
        best_count = merged;
        best_offset = c;
      }
    }
  }

  MatchCandidate mc;
  mc.id_a = id_a;
  mc.id_b = id_b;
  mc.best_offset_frames = best_offset;
  mc.score = best_count;
  std::uint32_t min_frame = 0;
  std::uint32_t max_frame = 0;
  bool first = true;
  std::vector<std::uint64_t> seconds;
  for (const HitEvent& h : hits) {
    if (h.offset_frames < best_offset - 1 || h.offset_frames > best_offset + 1) {
      continue;
    }
    if (first) {
      min_frame = max_frame = h.query_frame;
      first = false;
    } else {
      min_frame = std::min(min_frame, h.query_frame);
      max_frame = std::max(max_frame, h.query_frame);
    }
    seconds.push_back(static_cast<std::uint64_t>(h.query_frame) * params.hop /
                      params.sample_rate);
  }
  std::sort(seconds.begin(), seconds.end());
  seconds.erase(std::unique(seconds.begin(), seconds.end()), seconds.end());
  mc.matched_seconds = static_cast<std::uint32_t>(seconds.size());
  mc.match_duration_s =
      (max_frame - min_frame) * params.seconds_per_frame();
  // The seconds grid can straddle one more bin than the span covers; clamp
  // so coverage stays a fraction.
  mc.coverage = std::min(
      1.0, mc.matched_seconds / std::max(mc.match_duration_s, 1.0));
  return mc;
}

bool accept_pair(const MatchCandidate& mc, const MatcherParams& params) {
  return mc.score >= params.min_score && mc.coverage > params.min_coverage;
}

std::vector<DuplicatePair> find_duplicates(const FingerprintIndex& index,
                                           const MatcherParams& params,
                                           unsigned threads) {
  const std::vector<std::vector<Landmark>> per_rec =
      index.landmarks_by_ordinal();
  const std::size_t n = index.rec_table.size();
  std::vector<std::vector<DuplicatePair>> accepted(n);

  auto probe_one = [&](std::size_t q) {
    const std::string& qid = index.rec_table[q].id;
    // Hits per candidate ordinal, only for ids lexicographically after the
    // probe so each unordered pair is scored exactly once.
    std::unordered_map<std::uint32_t, std::vector<HitEvent>> by_cand;
    for (const Landmark& lm : per_rec[q]) {
      auto it = index.postings.find(lm.hash);
      for (const Posting& p : it->second) {
        if (p.ordinal == q || index.rec_table[p.ordinal].id <= qid) {
          continue;
        }
        by_cand[p.ordinal].push_back(HitEvent{
            static_cast<std::int32_t>(p.frame) -
                static_cast<std::int32_t>(lm.anchor_frame),
            lm.anchor_frame});
      }
    }
    for (const auto& [cand, hits] : by_cand) {
      const MatchCandidate mc = score_candidate(
          qid, index.rec_table[cand].id, hits, index.params);
      if (accept_pair(mc, params)) {
        accepted[q].push_back(DuplicatePair{
            mc.id_a, mc.id_b, mc.score, mc.coverage, mc.best_offset_frames,
            mc.best_offset_frames * index.params.seconds_per_frame()});
      }
    }
  };

  if (threads <= 1 || n <= 1) {
    for (std::size_t q = 0; q < n; ++q) {
      probe_one(q);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t q = next.fetch_add(1);
        if (q >= n) {
          return;
        }
        probe_one(q);
      }
    };
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(threads,
                                                static_cast<unsigned>(n));
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  std::vector<DuplicatePair> pairs;
  for (auto& chunk : accepted) {
    pairs.insert(pairs.end(), chunk.begin(), chunk.end());
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const DuplicatePair& x, const DuplicatePair& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });
  return pairs;
}

std::string pairs_to_jsonl(const std::vector<DuplicatePair>& pairs) {
  std::string out;
  for (const DuplicatePair& p : pairs) {
    json obj;
    obj["a"] = p.a;
    obj["b"] = p.b;
    obj["score"] = p.score;
    obj["coverage"] = p.coverage;
    obj["offset_s"] = p.offset_s;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<DuplicatePair> pairs_from_jsonl(const std::string& text,
                                            const std::string& origin) {
  std::vector<DuplicatePair> pairs;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ParseError(origin + ":" + std::to_string(i + 1) +
                       ": invalid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("a") || !obj.contains("b") ||
        !obj["a"].is_string() || !obj["b"].is_string()) {
      throw ParseError(origin + ":" + std::to_string(i + 1) +
                       ": pair record needs string keys \"a\" and \"b\"");
    }
    DuplicatePair p;
    p.a = obj["a"].get<std::string>();
    p.b = obj["b"].get<std::string>();
    if (p.a == p.b) {
      throw IntegrityError(origin + ":" + std::to_string(i + 1) +
                           ": self-pair \"" + p.a + "\"");
    }
    if (p.b < p.a) {
      std::swap(p.a, p.b);
    }
    if (obj.contains("score")) {
      p.score = obj["score"].get<std::uint32_t>();
    }
    if (obj.contains("coverage")) {
      p.coverage = obj["coverage"].get<double>();
    }
    if (obj.contains("offset_s")) {
      p.offset_s = obj["offset_s"].get<double>();
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace leakaudit
