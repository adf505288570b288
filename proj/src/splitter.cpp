// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/splitter.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"
#include "leakaudit/version.hpp"

namespace leakaudit {

using nlohmann::json;

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    default:
      return "test";
  }
}

Split split_from_name(const std::string& name) {
  if (name == "train") {
    return Split::kTrain;
  }
  if (name == "val") {
    return Split::kVal;
  }
  if (name == "test") {
    return Split::kTest;
  }
  throw ArgumentError("unknown split \"" + name +
                      "\" (expected train, val, or test)");
}

void SplitSpec::validate() const {
  if (train_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction <= 0.0) {
    throw ArgumentError("split fractions must be positive");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }
}

std::size_t SplitAssignment::count(Split s) const {
  std::size_t n = 0;
  for (const auto& [id, sp] : split_of) {
    if (sp == s) {
      ++n;
    }
  }
  return n;
}

namespace {

// Unbiased bounded draw; keeps shuffles reproducible across platforms
// (std::uniform_int_distribution is implementation-defined).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) {
      return r % bound;
    }
  }
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[draw_below(rng, i)]);
  }
}

struct GroupUnit {
  const std::string* gid;
  const std::vector<std::string>* members;
};

}  // namespace

SplitAssignment split_groups(const Catalog& catalog,
                             const GroupAssignment& groups,
                             const SplitSpec& spec) {
  spec.validate();
  if (groups.total_members() != catalog.size()) {
    throw IntegrityError(
        "groups do not cover the catalog: " +
        std::to_string(groups.total_members()) + " grouped ids vs " +
        std::to_string(catalog.size()) + " recordings");
  }
  for (const auto& [gid, members] : groups.groups) {
    for (const std::string& id : members) {
      if (!catalog.contains(id)) {
        throw IntegrityError("grouped id \"" + id + "\" not in catalog");
      }
    }
  }
  for (const auto& [gid, members] : groups.groups) {
    if (static_cast<double>(members.size()) >
        spec.train_fraction * static_cast<double>(catalog.size())) {
      throw InfeasibleError(
          "group \"" + gid + "\" (" + std::to_string(members.size()) +
          " items) exceeds the train fraction of the catalog; no valid "
          "split exists");
    }
  }

  // Stratum of a group: modal member category, ties toward the smaller name.
  std::map<std::string, std::vector<GroupUnit>> strata;
  for (const auto& [gid, members] : groups.groups) {
    std::map<std::string, std::size_t> votes;
    for (const std::string& id : members) {
      ++votes[catalog.at(*catalog.find(id)).primary_category];
    }
    const std::string* best = nullptr;
    std::size_t best_n = 0;
    for (const auto& [cat, n] : votes) {
      if (n > best_n) {  // map order makes the first max the smallest name
        best = &cat;
        best_n = n;
      }
    }
    strata[*best].push_back(GroupUnit{&gid, &members});
  }

  std::mt19937_64 rng(spec.seed);
  SplitAssignment out;
  out.spec = spec;
  out.group_mode = groups.mode;
  out.tool_version = kVersion;
  out.split_of.reserve(catalog.size());

  const Split order[3] = {Split::kTrain, Split::kVal, Split::kTest};
  // Deficit residuals roll from one stratum into the next so tiny strata
  // cannot collectively starve val/test.
  double carry[3] = {0.0, 0.0, 0.0};
  for (auto& [category, units] : strata) {
    std::sort(units.begin(), units.end(),
              [](const GroupUnit& a, const GroupUnit& b) {
                if (a.members->size() != b.members->size()) {
                  return a.members->size() > b.members->size();
                }
                return *a.gid < *b.gid;
              });
    // Shuffle runs of equal-size groups so different seeds explore
    // different valid splits.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= units.size(); ++i) {
      if (i == units.size() ||
          units[i].members->size() != units[run_start].members->size()) {
        if (i - run_start > 1) {
          std::vector<GroupUnit> run(units.begin() + run_start,
                                     units.begin() + i);
          seeded_shuffle(run, rng);
          std::copy(run.begin(), run.end(), units.begin() + run_start);
        }
        run_start = i;
      }
    }

    std::size_t stratum_items = 0;
    for (const GroupUnit& u : units) {
      stratum_items += u.members->size();
    }
    const double targets[3] = {
        carry[0] + spec.train_fraction * static_cast<double>(stratum_items),
        carry[1] + spec.val_fraction * static_cast<double>(stratum_items),
        carry[2] + spec.test_fraction * static_cast<double>(stratum_items)};
    double assigned[3] = {0.0, 0.0, 0.0};
    for (const GroupUnit& u : units) {
      int pick = 0;
      double best_deficit = targets[0] - assigned[0];
      for (int s = 1; s < 3; ++s) {
        const double deficit = targets[s] - assigned[s];
        if (deficit > best_deficit) {
          pick = s;
          best_deficit = deficit;
        }
      }
      assigned[pick] += static_cast<double>(u.members->size());
      for (const std::string& id : *u.members) {
        out.split_of.emplace(id, order[pick]);
      }
    }
    for (int s = 0; s < 3; ++s) {
      carry[s] = targets[s] - assigned[s];
    }
  }
  return out;
}

namespace {

Split split_of_checked(const SplitAssignment& split, const std::string& id) {
  auto it = split.split_of.find(id);
  if (it == split.split_of.end()) {
    throw IntegrityError("pair names id \"" + id +
                         "\" that has no split assignment");
  }
  return it->second;
}

}  // namespace

LeakageReport audit_leakage(const SplitAssignment& split,
                            const std::vector<DuplicatePair>& pairs,
                            const Catalog* catalog) {
  LeakageReport report;
  report.split_sizes = {{"train", 0}, {"val", 0}, {"test", 0}};
  for (const auto& [id, s] : split.split_of) {
    ++report.split_sizes[split_name(s)];
  }
  std::set<std::string> eval_dupes;
  for (const DuplicatePair& p : pairs) {
    const Split sa = split_of_checked(split, p.a);
    const Split sb = split_of_checked(split, p.b);
    const bool a_train = sa == Split::kTrain;
    const bool b_train = sb == Split::kTrain;
    if (a_train != b_train) {
      ++report.cross_split_pairs;
      eval_dupes.insert(a_train ? p.b : p.a);
    }
  }
  report.duplicates_in_eval.assign(eval_dupes.begin(), eval_dupes.end());
  if (catalog != nullptr) {
    for (const Recording& rec : *catalog) {
      auto it = split.split_of.find(rec.id);
      if (it == split.split_of.end()) {
        continue;
      }
      ++report.category_distribution[split_name(it->second)]
                                    [rec.primary_category];
    }
  }
  return report;
}

TrainSubset deduplicated_train(const SplitAssignment& split,
                               const std::vector<DuplicatePair>& pairs) {
  // Component labels over the pair graph only; ids outside any pair are
  // trivially kept.
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> pos;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = pos.emplace(id, ids.size());
    if (inserted) {
      ids.push_back(id);
    }
    return it->second;
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(pairs.size());
  for (const DuplicatePair& p : pairs) {
    edges.emplace_back(intern(p.a), intern(p.b));
  }
  UnionFind uf(ids.size());
  for (const auto& [a, b] : edges) {
    uf.unite(a, b);
  }
  std::vector<bool> component_has_eval(ids.size(), false);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (split_of_checked(split, ids[i]) != Split::kTrain) {
      component_has_eval[uf.find(i)] = true;
    }
  }

  TrainSubset out;
  for (const auto& [id, s] : split.split_of) {
    if (s != Split::kTrain) {
      continue;
    }
    auto it = pos.find(id);
    if (it != pos.end() && component_has_eval[uf.find(it->second)]) {
      ++out.removed;
    } else {
      out.ids.push_back(id);
    }
  }
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

TrainSubset random_reduced_train(const SplitAssignment& split,
                                 std::size_t n_remove, std::uint64_t seed) {
  std::vector<std::string> train;
  for (const auto& [id, s] : split.split_of) {
    if (s == Split::kTrain) {
      train.push_back(id);
    }
  }
  std::sort(train.begin(), train.end());
  if (n_remove > train.size()) {
    throw ArgumentError("cannot remove " + std::to_string(n_remove) +
                        " items from a train split of " +
                        std::to_string(train.size()));
  }
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first n_remove slots are the removals.
  for (std::size_t i = 0; i < n_remove; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(draw_below(rng, train.size() - i));
    std::swap(train[i], train[j]);
  }
  TrainSubset out;
  out.removed = n_remove;
  out.ids.assign(train.begin() + static_cast<std::ptrdiff_t>(n_remove),
                 train.end());
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

std::string splits_to_csv(const SplitAssignment& split,
                          const Catalog& catalog) {
  std::string out = "id,split\n";
  for (const Recording& rec : catalog) {
    auto it = split.split_of.find(rec.id);
    if (it == split.split_of.end()) {
      throw IntegrityError("recording \"" + rec.id +
                           "\" missing from the split assignment");
    }
    out += rec.id;
    out += ',';
    out += split_name(it->second);
    out += '\n';
  }
  return out;
}

SplitAssignment splits_from_csv(const std::string& text,
                                const std::string& origin) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "id,split") {
    throw ParseError(origin + ": expected header \"id,split\"");
  }
  SplitAssignment out;
  out.tool_version = kVersion;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) {
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw ParseError(origin + ":" + std::to_string(i + 1) +
                       ": malformed row \"" + line + "\"");
    }
    const std::string id = line.substr(0, comma);
    Split s;
    try {
      s = split_from_name(line.substr(comma + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(origin + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    if (!out.split_of.emplace(id, s).second) {
      throw IntegrityError(origin + ":" + std::to_string(i + 1) +
                           ": duplicate id \"" + id + "\"");
    }
  }
  return out;
}

std::string leakage_report_to_json(const LeakageReport& report) {
  json obj;
  obj["cross_split_pairs"] = report.cross_split_pairs;
  obj["split_sizes"] = report.split_sizes;
  json cats = json::object();
  for (const auto& [split, table] : report.category_distribution) {
    cats[split] = table;
  }
  obj["category_distribution"] = std::move(cats);
  obj["duplicates_in_eval"] = report.duplicates_in_eval;
  return obj.dump(2) + "\n";
}

}  // namespace leakaudit
