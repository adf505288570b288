// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "leakaudit/error.hpp"
#include "leakaudit/retrieval.hpp"
#include "support/oracles.hpp"
#include "support/signal.hpp"

using namespace leakaudit;
namespace ts = leakaudit::testsupport;
namespace fs = std::filesystem;

namespace {

std::string col_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "item%04zu", i);
  return buf;
}
std::string row_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "query%04zu", i);
  return buf;
}

SimilarityMatrix make_matrix(std::size_t n_queries, std::size_t n_items) {
  SimilarityMatrix sim;
  for (std::size_t q = 0; q < n_queries; ++q) {
    sim.queries.push_back(row_id(q));
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    sim.items.push_back(col_id(i));
  }
  sim.scores.assign(n_queries * n_items, 0.0f);
  return sim;
}

}  // namespace

TEST_CASE("identity scores give perfect retrieval") {
  SimilarityMatrix sim = make_matrix(20, 20);
  for (std::size_t q = 0; q < 20; ++q) {
    sim.scores[q * 20 + q] = 1.0f;
    sim.ground_truth[row_id(q)] = col_id(q);
  }
  sim.validate();
  CHECK(recall_at_k(sim, 1) == 100.0);
  CHECK(recall_at_k(sim, 5) == 100.0);
}

TEST_CASE("a single query whose truth ranks third") {
  SimilarityMatrix sim = make_matrix(1, 10);
  for (std::size_t i = 0; i < 10; ++i) {
    sim.scores[i] = static_cast<float>(10 - i);
  }
  sim.ground_truth[row_id(0)] = col_id(2);  // third-highest score
  CHECK(rank_of_truth(sim, 0) == 3);
  CHECK(recall_at_k(sim, 1) == 0.0);
  CHECK(recall_at_k(sim, 5) == 100.0);
  const EvalReport report =
      subset_report(sim, {row_id(0)}, {1, 5}, "single");
  CHECK(report.recall_at.at(1) == 0.0);
  CHECK(report.recall_at.at(5) == 100.0);
}

TEST_CASE("ranks match the full-sort oracle, ties included") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nq = 1 + ts::rint_below(rng, 30);
    const std::size_t ni = 2 + ts::rint_below(rng, 50);
    SimilarityMatrix sim = make_matrix(nq, ni);
    for (float& s : sim.scores) {
      // Small discrete score alphabet forces plenty of ties.
      s = static_cast<float>(ts::rint_below(rng, 8)) * 0.25f;
    }
    for (std::size_t q = 0; q < nq; ++q) {
      sim.ground_truth[row_id(q)] = col_id(ts::rint_below(rng, ni));
    }
    for (std::size_t q = 0; q < nq; ++q) {
      const std::vector<float> row(
          sim.scores.begin() + static_cast<std::ptrdiff_t>(q * ni),
          sim.scores.begin() + static_cast<std::ptrdiff_t>((q + 1) * ni));
      std::size_t truth_col = 0;
      for (std::size_t i = 0; i < ni; ++i) {
        if (sim.items[i] == sim.ground_truth.at(row_id(q))) {
          truth_col = i;
        }
      }
      CHECK(rank_of_truth(sim, q) ==
            ts::full_sort_rank(row, sim.items, truth_col));
    }
  }
}

TEST_CASE("recall is monotone in k") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ni = 10 + ts::rint_below(rng, 60);
    SimilarityMatrix sim = make_matrix(6, ni);
    for (float& s : sim.scores) {
      s = static_cast<float>(ts::runif(rng, -1.0, 1.0));
    }
    for (std::size_t q = 0; q < 6; ++q) {
      sim.ground_truth[row_id(q)] = col_id(ts::rint_below(rng, ni));
    }
    const double r1 = recall_at_k(sim, 1);
    const double r5 = recall_at_k(sim, 5);
    const double r10 = recall_at_k(sim, 10);
    CHECK(r1 <= r5);
    CHECK(r5 <= r10);
    CHECK(r10 <= 100.0);
  }
}

TEST_CASE("recall is invariant under strictly increasing score transforms") {
  std::mt19937_64 rng(47);
  SimilarityMatrix sim = make_matrix(8, 40);
  for (float& s : sim.scores) {
    s = static_cast<float>(ts::runif(rng, -2.0, 2.0));
  }
  for (std::size_t q = 0; q < 8; ++q) {
    sim.ground_truth[row_id(q)] = col_id(ts::rint_below(rng, 40));
  }
  SimilarityMatrix warped = sim;
  for (float& s : warped.scores) {
    s = std::tanh(s) * 3.0f + 1.0f;  // strictly increasing
  }
  for (int k : {1, 5, 10}) {
    CHECK(recall_at_k(sim, k) == recall_at_k(warped, k));
  }
}

TEST_CASE("permuting items with remapped truth leaves recall unchanged") {
  std::mt19937_64 rng(53);
  SimilarityMatrix sim = make_matrix(6, 30);
  for (float& s : sim.scores) {
    s = static_cast<float>(ts::runif(rng, 0.0, 1.0));  // ties improbable
  }
  for (std::size_t q = 0; q < 6; ++q) {
    sim.ground_truth[row_id(q)] = col_id(ts::rint_below(rng, 30));
  }
  std::vector<std::size_t> perm(30);
  for (std::size_t i = 0; i < 30; ++i) {
    perm[i] = i;
  }
  for (std::size_t i = 30; i > 1; --i) {
    std::swap(perm[i - 1], perm[ts::rint_below(rng, i)]);
  }
  SimilarityMatrix shuffled = make_matrix(6, 30);
  shuffled.ground_truth = sim.ground_truth;
  for (std::size_t i = 0; i < 30; ++i) {
    shuffled.items[perm[i]] = sim.items[i];
    for (std::size_t q = 0; q < 6; ++q) {
      shuffled.scores[q * 30 + perm[i]] = sim.scores[q * 30 + i];
    }
  }
  for (int k : {1, 3, 10}) {
    CHECK(recall_at_k(sim, k) == recall_at_k(shuffled, k));
  }
}

TEST_CASE("all-equal scores hit the tie-break expectation") {
  // One query, 100 items, every score equal: the truth wins R@1 only when
  // it is the id-smallest item. Expectation over uniformly relabeled items
  // is 1%, estimated over 1000 seeded trials.
  std::mt19937_64 rng(59);
  double total = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    SimilarityMatrix sim;
    sim.queries = {"q"};
    std::vector<std::size_t> perm(100);
    for (std::size_t i = 0; i < 100; ++i) {
      perm[i] = i;
    }
    for (std::size_t i = 100; i > 1; --i) {
      std::swap(perm[i - 1], perm[ts::rint_below(rng, i)]);
    }
    for (std::size_t i = 0; i < 100; ++i) {
      sim.items.push_back(col_id(perm[i]));
    }
    sim.scores.assign(100, 0.5f);
    sim.ground_truth["q"] = sim.items[0];
    total += recall_at_k(sim, 1);
  }
  CHECK(std::abs(total / 1000.0 - 1.0) <= 0.5);
}

TEST_CASE("subset recall ranks against all items") {
  SimilarityMatrix sim = make_matrix(4, 50);
  // Queries 0 and 1 have rank-1 truths; queries 2 and 3 rank ~20.
  for (std::size_t q = 0; q < 4; ++q) {
    for (std::size_t i = 0; i < 50; ++i) {
      sim.scores[q * 50 + i] = static_cast<float>(50 - i);
    }
    const std::size_t truth = q < 2 ? 0 : 20;
    sim.ground_truth[row_id(q)] = col_id(truth);
  }
  const EvalReport full = full_report(sim, {1, 5, 10});
  CHECK(full.recall_at.at(1) == 50.0);
  const EvalReport subset =
      subset_report(sim, {row_id(0), row_id(1)}, {1, 5, 10}, "dupes");
  CHECK(subset.recall_at.at(1) == 100.0);
  CHECK(subset.n_queries == 2);

  const EvalReport all_again =
      subset_report(sim, sim.queries, {1, 5, 10}, "all");
  CHECK(all_again.recall_at == full.recall_at);

  CHECK_THROWS_AS(subset_report(sim, {"ghost"}, {1}, "s"), IntegrityError);
}

TEST_CASE("argument and integrity errors trigger") {
  SimilarityMatrix sim = make_matrix(2, 5);
  sim.ground_truth[row_id(0)] = col_id(0);  // query 1 has no truth
  CHECK_THROWS_AS(recall_at_k(sim, 0), ArgumentError);
  CHECK_THROWS_AS(recall_at_k(sim, 6), ArgumentError);
  CHECK_THROWS_AS(recall_at_k(sim, 1), IntegrityError);

  SimilarityMatrix dup = make_matrix(2, 5);
  dup.items[1] = dup.items[0];
  dup.ground_truth[row_id(0)] = col_id(0);
  dup.ground_truth[row_id(1)] = col_id(0);
  CHECK_THROWS_AS(dup.validate(), IntegrityError);

  SimilarityMatrix inf = make_matrix(1, 2);
  inf.scores[0] = std::numeric_limits<float>::infinity();
  inf.ground_truth[row_id(0)] = col_id(0);
  CHECK_THROWS_AS(inf.validate(), IntegrityError);

  SimilarityMatrix missing = make_matrix(1, 2);
  missing.ground_truth[row_id(0)] = "not-an-item";
  CHECK_THROWS_AS(missing.validate(), IntegrityError);
}

TEST_CASE("compare_reports reproduces the published deltas") {
  EvalReport original;
  original.subset_name = "original";
  original.recall_at = {{1, 31.3}, {5, 60.9}, {10, 70.9}};
  EvalReport dedup;
  dedup.subset_name = "deduplicated";
  dedup.recall_at = {{1, 26.6}, {5, 55.5}, {10, 66.1}};
  const ReportDelta d = compare_reports(original, dedup);
  CHECK(d.delta.at(1) == doctest::Approx(-4.7).epsilon(1e-9));
  CHECK(d.to_text().find("R@1: -4.7") != std::string::npos);

  EvalReport dup_original;
  dup_original.subset_name = "dupes-original";
  dup_original.recall_at = {{1, 52.2}};
  EvalReport dup_dedup;
  dup_dedup.subset_name = "dupes-deduplicated";
  dup_dedup.recall_at = {{1, 21.6}};
  const ReportDelta d2 = compare_reports(dup_original, dup_dedup);
  CHECK(d2.delta.at(1) == doctest::Approx(-30.6).epsilon(1e-9));
  CHECK(d2.to_text().find("R@1: -30.6") != std::string::npos);

  const ReportDelta zero = compare_reports(original, original);
  for (const auto& [k, v] : zero.delta) {
    CHECK(v == 0.0);
  }

  EvalReport other_ks;
  other_ks.recall_at = {{1, 10.0}, {20, 50.0}, {10, 40.0}};
  CHECK_THROWS_AS(compare_reports(original, other_ks), ArgumentError);
}

TEST_CASE("similarity files load inline and with a sidecar") {
  const fs::path dir = fs::temp_directory_path() / "leakaudit_sim";
  fs::create_directories(dir);
  const std::string inline_json = R"({
    "queries": ["q0", "q1"],
    "items": ["a", "b", "c"],
    "ground_truth": {"q0": "a", "q1": "c"},
    "scores": [[3.0, 2.0, 1.0], [0.0, 0.5, 2.5]]
  })";
  {
    std::ofstream f(dir / "inline.json");
    f << inline_json;
  }
  const SimilarityMatrix sim = load_similarity(dir / "inline.json");
  CHECK(sim.queries.size() == 2);
  CHECK(recall_at_k(sim, 1) == 100.0);

  // Sidecar: same matrix as little-endian f32.
  {
    std::ofstream f(dir / "side.json");
    f << R"({"queries": ["q0", "q1"], "items": ["a", "b", "c"],
             "ground_truth": {"q0": "a", "q1": "c"},
             "scores_file": "scores.f32"})";
  }
  {
    std::ofstream f(dir / "scores.f32", std::ios::binary);
    const float vals[] = {3.0f, 2.0f, 1.0f, 0.0f, 0.5f, 2.5f};
    f.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  }
  const SimilarityMatrix side = load_similarity(dir / "side.json");
  CHECK(side.scores == sim.scores);

  // Wrong sidecar size is a format error.
  {
    std::ofstream f(dir / "scores.f32", std::ios::binary | std::ios::trunc);
    const float vals[] = {1.0f, 2.0f};
    f.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  }
  CHECK_THROWS_AS(load_similarity(dir / "side.json"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("eval reports round-trip through json") {
  EvalReport report;
  report.subset_name = "full";
  report.n_queries = 42;
  report.recall_at = {{1, 31.25}, {5, 60.0}};
  const EvalReport loaded = eval_report_from_json(eval_report_to_json(report));
  CHECK(loaded.subset_name == report.subset_name);
  CHECK(loaded.n_queries == report.n_queries);
  CHECK(loaded.recall_at == report.recall_at);
}
