// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakaudit/grouping.hpp"
#include "leakaudit/manifest.hpp"
#include "leakaudit/matcher.hpp"

namespace leakaudit {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;

  // Fractions must be positive and sum to 1 within 1e-9.
  void validate() const;
};

struct SplitAssignment {
  std::unordered_map<std::string, Split> split_of;
  // Provenance
  SplitSpec spec;
  GroupMode group_mode = GroupMode::kClean;
  std::string tool_version;

  std::size_t count(Split s) const;
};

// Stratified, group-atomic split. Each group's stratum is the modal
// primary_category of its members (ties toward the smaller category name).
// Within a stratum, groups are placed largest-first into the split with the
// largest remaining item deficit; equal-size groups are shuffled by a
// generator seeded from spec.seed. Throws InfeasibleError when one group
// exceeds the train fraction of the catalog, IntegrityError when groups do
// not exactly cover the catalog.
SplitAssignment split_groups(const Catalog& catalog,
                             const GroupAssignment& groups,
                             const SplitSpec& spec);

struct LeakageReport {
  std::size_t cross_split_pairs = 0;  // TRAIN x (VAL u TEST) duplicate pairs
  std::map<std::string, std::size_t> split_sizes;
  // split name -> category -> count; filled when a catalog is supplied
  std::map<std::string, std::map<std::string, std::size_t>>
      category_distribution;
  std::vector<std::string> duplicates_in_eval;  // sorted, unique
};

// Counts duplicate pairs straddling the train/eval boundary. The catalog is
// optional and only feeds the per-category table.
LeakageReport audit_leakage(const SplitAssignment& split,
                            const std::vector<DuplicatePair>& pairs,
                            const Catalog* catalog = nullptr);

struct TrainSubset {
  std::vector<std::string> ids;  // kept train ids, sorted
  std::size_t removed = 0;
};

// TRAIN minus every id connected (transitively, through the pair graph) to
// a VAL or TEST id.
TrainSubset deduplicated_train(const SplitAssignment& split,
                               const std::vector<DuplicatePair>& pairs);

// Removes exactly n_remove uniformly chosen train ids; deterministic per
// seed. Throws ArgumentError when n_remove exceeds the train size.
TrainSubset random_reduced_train(const SplitAssignment& split,
                                 std::size_t n_remove, std::uint64_t seed);

// splits.csv: header "id,split", one row per recording in catalog order.
std::string splits_to_csv(const SplitAssignment& split,
                          const Catalog& catalog);
SplitAssignment splits_from_csv(const std::string& text,
                                const std::string& origin = "<memory>");

std::string leakage_report_to_json(const LeakageReport& report);

}  // namespace leakaudit
