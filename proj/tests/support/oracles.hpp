// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakaudit/matcher.hpp"

namespace leakaudit::testsupport {

// Brute-force connected components via breadth-first search, independent of
// the union-find implementation. Returns components as sorted node lists,
// sorted by first node.
std::vector<std::vector<std::size_t>> bfs_components(
    std::size_t n_nodes,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges);

// Reference scorer that explicitly tries every integer offset center in
// [min-1, max+1] and counts hits within +-1 frame.
struct BruteScore {
  std::uint32_t score = 0;
  std::int32_t best_offset = 0;
  double match_duration_s = 0.0;
  std::uint32_t matched_seconds = 0;
  double coverage = 0.0;
};
BruteScore brute_force_score(const std::vector<leakaudit::HitEvent>& hits,
                             std::uint32_t hop, std::uint32_t sample_rate);

// Reference ranker: fully sorts one score row by (score desc, item id asc)
// and returns the 1-based position of the truth item.
std::size_t full_sort_rank(const std::vector<float>& row,
                           const std::vector<std::string>& item_ids,
                           std::size_t truth_col);

// O(n^2) DFT magnitude spectrum (first n/2+1 bins), the FFT-free oracle.
std::vector<double> naive_dft_magnitude(const std::vector<float>& samples);

}  // namespace leakaudit::testsupport
