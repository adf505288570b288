// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace leakaudit {

// Externally produced similarity scores: queries x items, plus the
// ground-truth item of each query.
struct SimilarityMatrix {
  std::vector<std::string> queries;
  std::vector<std::string> items;
  std::vector<float> scores;  // row-major, queries.size() * items.size()
  std::unordered_map<std::string, std::string> ground_truth;

  float score(std::size_t q, std::size_t i) const {
    return scores[q * items.size() + i];
  }
  // Checks duplicate-free id lists, finite scores, matrix shape, and that
  // every ground-truth target exists among the items.
  void validate() const;
};

struct EvalReport {
  std::string subset_name;
  std::size_t n_queries = 0;
  std::map<int, double> recall_at;  // k -> percentage, full precision
};

// Rank of a query's ground-truth item: 1 + items with strictly greater
// score + tied items preceding it in ascending item-id order.
std::size_t rank_of_truth(const SimilarityMatrix& sim, std::size_t query_row);

// Percentage of queries whose ground-truth rank is <= k. Throws
// ArgumentError when k is out of [1, |items|], IntegrityError when a query
// lacks ground truth.
double recall_at_k(const SimilarityMatrix& sim, int k);

// Recall over a query subset, still ranked against all items. Throws
// IntegrityError when a subset id is not among the queries.
EvalReport subset_report(const SimilarityMatrix& sim,
                         const std::vector<std::string>& subset,
                         const std::vector<int>& ks,
                         const std::string& subset_name = "subset");

// Full-set report (subset = all queries).
EvalReport full_report(const SimilarityMatrix& sim,
                       const std::vector<int>& ks);

// Per-k differences b - a. Throws ArgumentError when the k sets differ.
struct ReportDelta {
  std::string name_a;
  std::string name_b;
  std::map<int, double> delta;  // k -> b - a

  std::string to_text() const;  // one decimal place, Table-style
  std::string to_json() const;
};
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);

// Similarity input: a single JSON file with inline "scores", or a JSON
// header with "scores_file" naming a row-major little-endian f32 sidecar
// (resolved relative to the JSON file's directory).
SimilarityMatrix load_similarity(const std::filesystem::path& path);
SimilarityMatrix similarity_from_json(const std::string& text,
                                      const std::filesystem::path& base_dir,
                                      const std::string& origin = "<memory>");

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text,
                                 const std::string& origin = "<memory>");
std::string eval_report_to_text(const EvalReport& report);

}  // namespace leakaudit
