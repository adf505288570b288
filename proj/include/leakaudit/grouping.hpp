// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakaudit/manifest.hpp"
#include "leakaudit/matcher.hpp"

namespace leakaudit {

// Disjoint-set forest with union by size and path compression.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);

  std::size_t find(std::size_t x);
  // Returns true when two distinct sets were merged.
  bool unite(std::size_t a, std::size_t b);
  std::size_t set_count() const { return sets_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t sets_;
};

enum class GroupMode { kClean, kGroupFiltered };

const char* group_mode_name(GroupMode mode);
GroupMode group_mode_from_name(const std::string& name);

// A partition of all recording ids. Every recording appears in exactly one
// group; singletons are materialized as groups of size 1. The group id is
// the lexicographically smallest member id; member lists are sorted.
struct GroupAssignment {
  GroupMode mode = GroupMode::kClean;
  std::map<std::string, std::vector<std::string>> groups;
  std::unordered_map<std::string, std::string> group_of;

  std::size_t total_members() const;
};

// Connected components of the duplicate-pair graph over the catalog.
// Throws IntegrityError when a pair names an unknown id.
GroupAssignment groups_from_pairs(const Catalog& catalog,
                                  const std::vector<DuplicatePair>& pairs);

// Buckets recordings by exact SessionKey equality; keyless recordings are
// omitted. Bucket member lists are sorted.
std::map<SessionKey, std::vector<std::string>> session_groups(
    const Catalog& catalog);

// Overlays session buckets on the clean groups: components of the union of
// both edge sets. Result groups are supersets of clean groups.
GroupAssignment merge_group_sources(
    const GroupAssignment& clean,
    const std::map<SessionKey, std::vector<std::string>>& sessions);

// groups.json: {"mode": "clean"|"group-filtered", "groups": {gid: [ids]}}.
std::string groups_to_json(const GroupAssignment& groups);
GroupAssignment groups_from_json(const std::string& text,
                                 const std::string& origin = "<memory>");

}  // namespace leakaudit
