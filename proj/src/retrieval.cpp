// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/retrieval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"

namespace leakaudit {

using nlohmann::json;

void SimilarityMatrix::validate() const {
  auto check_unique = [](const std::vector<std::string>& ids,
                         const char* what) {
    std::set<std::string> seen;
    for (const std::string& id : ids) {
      if (!seen.insert(id).second) {
        throw IntegrityError(std::string("duplicate ") + what + " id \"" + id +
                             "\"");
      }
    }
  };
  check_unique(queries, "query");
  check_unique(items, "item");
  if (scores.size() != queries.size() * items.size()) {
    throw IntegrityError("score matrix has " + std::to_string(scores.size()) +
                         " entries, expected " +
                         std::to_string(queries.size() * items.size()));
  }
  for (float s : scores) {
    if (!std::isfinite(s)) {
      throw IntegrityError("score matrix contains a non-finite value");
    }
  }
  std::set<std::string> item_set(items.begin(), items.end());
  for (const auto& [q, target] : ground_truth) {
    if (item_set.find(target) == item_set.end()) {
      throw IntegrityError("ground-truth target \"" + target +
                           "\" of query \"" + q + "\" is not among the items");
    }
  }
}

std::size_t rank_of_truth(const SimilarityMatrix& sim, std::size_t query_row) {
  const std::string& qid = sim.queries.at(query_row);
  auto gt = sim.ground_truth.find(qid);
  if (gt == sim.ground_truth.end()) {
    throw IntegrityError("query \"" + qid + "\" has no ground-truth item");
  }
  std::size_t truth_col = sim.items.size();
  for (std::size_t i = 0; i < sim.items.size(); ++i) {
    if (sim.items[i] == gt->second) {
      truth_col = i;
      break;
    }
  }
  if (truth_col == sim.items.size()) {
    throw IntegrityError("ground-truth item \"" + gt->second +
                         "\" not among the items");
  }
  const float truth_score = sim.score(query_row, truth_col);
  std::size_t rank = 1;
  for (std::size_t i = 0; i < sim.items.size(); ++i) {
    if (i == truth_col) {
      continue;
    }
    const float s = sim.score(query_row, i);
    if (s > truth_score ||
        (s == truth_score && sim.items[i] < sim.items[truth_col])) {
      ++rank;
    }
  }
  return rank;
}

namespace {

void check_k(const SimilarityMatrix& sim, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > sim.items.size()) {
    throw ArgumentError("k = " + std::to_string(k) +
                        " out of range [1, " +
                        std::to_string(sim.items.size()) + "]");
  }
}

}  // namespace

double recall_at_k(const SimilarityMatrix& sim, int k) {
  check_k(sim, k);
  if (sim.queries.empty()) {
    throw ArgumentError("similarity matrix has no queries");
  }
  std::size_t hits = 0;
  for (std::size_t q = 0; q < sim.queries.size(); ++q) {
    if (rank_of_truth(sim, q) <= static_cast<std::size_t>(k)) {
      ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(sim.queries.size());
}

EvalReport subset_report(const SimilarityMatrix& sim,
                         const std::vector<std::string>& subset,
                         const std::vector<int>& ks,
                         const std::string& subset_name) {
  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(sim.queries.size());
  for (std::size_t q = 0; q < sim.queries.size(); ++q) {
    row_of.emplace(sim.queries[q], q);
  }
  std::vector<std::size_t> rows;
  rows.reserve(subset.size());
  for (const std::string& id : subset) {
    auto it = row_of.find(id);
    if (it == row_of.end()) {
      throw IntegrityError("subset id \"" + id + "\" is not a query");
    }
    rows.push_back(it->second);
  }
  if (rows.empty()) {
    throw ArgumentError("subset is empty");
  }
  for (int k : ks) {
    check_k(sim, k);
  }
  std::vector<std::size_t> ranks;
  ranks.reserve(rows.size());
  for (std::size_t row : rows) {
    ranks.push_back(rank_of_truth(sim, row));
  }
  EvalReport report;
  report.subset_name = subset_name;
  report.n_queries = rows.size();
  for (int k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : ranks) {
      if (r <= static_cast<std::size_t>(k)) {
        ++hits;
      }
    }
    report.recall_at[k] = 100.0 * static_cast<double>(hits) /
                          static_cast<double>(rows.size());
  }
  return report;
}

EvalReport full_report(const SimilarityMatrix& sim,
                       const std::vector<int>& ks) {
  return subset_report(sim, sim.queries, ks, "full");
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
  auto keys = [](const EvalReport& r) {
    std::vector<int> ks;
    for (const auto& [k, v] : r.recall_at) {
      ks.push_back(k);
    }
    return ks;
  };
  if (keys(a) != keys(b)) {
    throw ArgumentError("reports have different k sets and cannot be compared");
  }
  ReportDelta d;
  d.name_a = a.subset_name;
  d.name_b = b.subset_name;
  for (const auto& [k, va] : a.recall_at) {
    d.delta[k] = b.recall_at.at(k) - va;
  }
  return d;
}

namespace {

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  // Avoid "-0.0" for tiny negative rounding residue.
  if (std::strcmp(buf, "-0.0") == 0) {
    return "0.0";
  }
  return buf;
}

}  // namespace

std::string ReportDelta::to_text() const {
  std::string out = "delta (" + name_b + " - " + name_a + ")\n";
  for (const auto& [k, v] : delta) {
    out += "R@" + std::to_string(k) + ": " + one_decimal(v) + "\n";
  }
  return out;
}

std::string ReportDelta::to_json() const {
  json obj;
  obj["a"] = name_a;
  obj["b"] = name_b;
  json d = json::object();
  for (const auto& [k, v] : delta) {
    d[std::to_string(k)] = v;
  }
  obj["delta"] = std::move(d);
  return obj.dump(2) + "\n";
}

SimilarityMatrix similarity_from_json(const std::string& text,
                                      const std::filesystem::path& base_dir,
                                      const std::string& origin) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object() || !obj.contains("queries") || !obj.contains("items") ||
      !obj.contains("ground_truth")) {
    throw ParseError(origin +
                     ": similarity file needs \"queries\", \"items\", and "
                     "\"ground_truth\"");
  }
  SimilarityMatrix sim;
  for (const json& q : obj["queries"]) {
    sim.queries.push_back(q.get<std::string>());
  }
  for (const json& i : obj["items"]) {
    sim.items.push_back(i.get<std::string>());
  }
  for (const auto& [q, t] : obj["ground_truth"].items()) {
    sim.ground_truth.emplace(q, t.get<std::string>());
  }
  const std::size_t expected = sim.queries.size() * sim.items.size();
  if (obj.contains("scores")) {
    const json& rows = obj["scores"];
    if (!rows.is_array() || rows.size() != sim.queries.size()) {
      throw ParseError(origin + ": \"scores\" must have one row per query");
    }
    sim.scores.reserve(expected);
    for (const json& row : rows) {
      if (!row.is_array() || row.size() != sim.items.size()) {
        throw ParseError(origin + ": score row length != item count");
      }
      for (const json& v : row) {
        sim.scores.push_back(v.get<float>());
      }
    }
  } else if (obj.contains("scores_file")) {
    const std::filesystem::path sidecar =
        base_dir / obj["scores_file"].get<std::string>();
    const std::string raw = read_file(sidecar);
    if (raw.size() != expected * 4) {
      throw FormatError(sidecar.string() + ": expected " +
                        std::to_string(expected * 4) + " bytes (" +
                        std::to_string(sim.queries.size()) + " x " +
                        std::to_string(sim.items.size()) +
                        " f32), found " + std::to_string(raw.size()));
    }
    sim.scores.resize(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) {
        bits = (bits << 8) |
               static_cast<std::uint8_t>(raw[i * 4 + static_cast<std::size_t>(b)]);
      }
      float f;
      std::memcpy(&f, &bits, 4);
      sim.scores[i] = f;
    }
  } else {
    throw ParseError(origin + ": need \"scores\" or \"scores_file\"");
  }
  sim.validate();
  return sim;
}

SimilarityMatrix load_similarity(const std::filesystem::path& path) {
  std::filesystem::path dir = path.parent_path();
  if (dir.empty()) {
    dir = ".";
  }
  return similarity_from_json(read_file(path), dir, path.string());
}

std::string eval_report_to_json(const EvalReport& report) {
  json obj;
  obj["subset_name"] = report.subset_name;
  obj["n_queries"] = report.n_queries;
  json r = json::object();
  for (const auto& [k, v] : report.recall_at) {
    r[std::to_string(k)] = v;
  }
  obj["recall_at"] = std::move(r);
  return obj.dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& text,
                                 const std::string& origin) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object() || !obj.contains("recall_at") ||
      !obj["recall_at"].is_object()) {
    throw ParseError(origin + ": report needs an object \"recall_at\"");
  }
  EvalReport report;
  if (obj.contains("subset_name")) {
    report.subset_name = obj["subset_name"].get<std::string>();
  }
  if (obj.contains("n_queries")) {
    report.n_queries = obj["n_queries"].get<std::size_t>();
  }
  for (const auto& [k, v] : obj["recall_at"].items()) {
    try {
      report.recall_at[std::stoi(k)] = v.get<double>();
    } catch (const std::exception&) {
      throw ParseError(origin + ": bad recall_at key \"" + k + "\"");
    }
  }
  return report;
}

std::string eval_report_to_text(const EvalReport& report) {
  std::string out =
      report.subset_name + " (" + std::to_string(report.n_queries) +
      " queries)\n";
  for (const auto& [k, v] : report.recall_at) {
    out += "R@" + std::to_string(k) + ": " + one_decimal(v) + "\n";
  }
  return out;
}

}  // namespace leakaudit
