// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/grouping.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

#include "leakaudit/error.hpp"

namespace leakaudit {

using nlohmann::json;

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1), sets_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) {
    root = parent_[root];
  }
  while (parent_[x] != root) {
    std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  std::size_t ra = find(a);
  std::size_t rb = find(b);
  if (ra == rb) {
    return false;
  }
  if (size_[ra] < size_[rb]) {
    std::swap(ra, rb);
  }
  parent_[rb] = ra;
  size_[ra] += size_[rb];
  --sets_;
  return true;
}

const char* group_mode_name(GroupMode mode) {
  return mode == GroupMode::kClean ? "clean" : "group-filtered";
}

GroupMode group_mode_from_name(const std::string& name) {
  if (name == "clean") {
    return GroupMode::kClean;
  }
  if (name == "group-filtered") {
    return GroupMode::kGroupFiltered;
  }
  throw ArgumentError("unknown group mode \"" + name +
                      "\" (expected \"clean\" or \"group-filtered\")");
}

std::size_t GroupAssignment::total_members() const {
  std::size_t n = 0;
  for (const auto& [gid, members] : groups) {
    n += members.size();
  }
  return n;
}

namespace {

// Canonicalizes a union-find partition over `ids`: group id = smallest
// member, members sorted.
GroupAssignment materialize(GroupMode mode, const std::vector<std::string>& ids,
                            UnionFind& uf) {
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    by_root[uf.find(i)].push_back(i);
  }
  GroupAssignment out;
  out.mode = mode;
  for (auto& [root, members] : by_root) {
    std::vector<std::string> names;
    names.reserve(members.size());
    for (std::size_t i : members) {
      names.push_back(ids[i]);
    }
    std::sort(names.begin(), names.end());
    const std::string gid = names.front();
    for (const std::string& id : names) {
      out.group_of.emplace(id, gid);
    }
    out.groups.emplace(gid, std::move(names));
  }
  return out;
}

}  // namespace

GroupAssignment groups_from_pairs(const Catalog& catalog,
                                  const std::vector<DuplicatePair>& pairs) {
  std::vector<std::string> ids;
  ids.reserve(catalog.size());
  for (const Recording& rec : catalog) {
    ids.push_back(rec.id);
  }
  UnionFind uf(ids.size());
  for (const DuplicatePair& p : pairs) {
    const auto pa = catalog.find(p.a);
    const auto pb = catalog.find(p.b);
    if (!pa || !pb) {
      throw IntegrityError("duplicate pair names unknown id \"" +
                           (pa ? p.b : p.a) + "\"");
    }
    uf.unite(*pa, *pb);
  }
  return materialize(GroupMode::kClean, ids, uf);
}

std::map<SessionKey, std::vector<std::string>> session_groups(
    const Catalog& catalog) {
  std::map<SessionKey, std::vector<std::string>> buckets;
  for (const Recording& rec : catalog) {
    if (auto key = session_key(rec)) {
      buckets[*key].push_back(rec.id);
    }
  }
  for (auto& [key, members] : buckets) {
    std::sort(members.begin(), members.end());
  }
  return buckets;
}

GroupAssignment merge_group_sources(
    const GroupAssignment& clean,
    const std::map<SessionKey, std::vector<std::string>>& sessions) {
  std::vector<std::string> ids;
  ids.reserve(clean.group_of.size());
  for (const auto& [gid, members] : clean.groups) {
    ids.insert(ids.end(), members.begin(), members.end());
  }
  std::sort(ids.begin(), ids.end());
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    pos.emplace(ids[i], i);
  }

  UnionFind uf(ids.size());
  for (const auto& [gid, members] : clean.groups) {
    for (std::size_t i = 1; i < members.size(); ++i) {
      uf.unite(pos.at(members[0]), pos.at(members[i]));
    }
  }
  for (const auto& [key, members] : sessions) {
    for (std::size_t i = 1; i < members.size(); ++i) {
      auto first = pos.find(members[0]);
      auto cur = pos.find(members[i]);
      if (first == pos.end() || cur == pos.end()) {
        throw IntegrityError(
            "session bucket member not present in the clean grouping: \"" +
            (first == pos.end() ? members[0] : members[i]) + "\"");
      }
      uf.unite(first->second, cur->second);
    }
  }
  return materialize(GroupMode::kGroupFiltered, ids, uf);
}

std::string groups_to_json(const GroupAssignment& groups) {
  json obj;
  obj["mode"] = group_mode_name(groups.mode);
  json g = json::object();
  for (const auto& [gid, members] : groups.groups) {
    g[gid] = members;
  }
  obj["groups"] = std::move(g);
  return obj.dump(2) + "\n";
}

GroupAssignment groups_from_json(const std::string& text,
                                 const std::string& origin) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object() || !obj.contains("mode") || !obj.contains("groups") ||
      !obj["mode"].is_string() || !obj["groups"].is_object()) {
    throw ParseError(origin +
                     ": groups file needs \"mode\" and object \"groups\"");
  }
  GroupAssignment out;
  out.mode = group_mode_from_name(obj["mode"].get<std::string>());
  for (const auto& [gid, members] : obj["groups"].items()) {
    if (!members.is_array() || members.empty()) {
      throw ParseError(origin + ": group \"" + gid +
                       "\" must be a non-empty array");
    }
    std::vector<std::string> names;
    for (const json& m : members) {
      if (!m.is_string()) {
        throw ParseError(origin + ": group \"" + gid +
                         "\" has a non-string member");
      }
      names.push_back(m.get<std::string>());
    }
    std::sort(names.begin(), names.end());
    for (const std::string& id : names) {
      auto [it, inserted] = out.group_of.emplace(id, gid);
      if (!inserted) {
        throw IntegrityError(origin + ": id \"" + id +
                             "\" appears in more than one group");
      }
    }
    out.groups.emplace(gid, std::move(names));
  }
  return out;
}

}  // namespace leakaudit
