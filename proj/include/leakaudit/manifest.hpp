// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace leakaudit {

enum class SourceArchive { kNhu, kOther };

// One corpus item as described by the manifest.
struct Recording {
  std::string id;
  std::string audio_path;
  double duration_s = 0.0;  // 0 when the manifest does not state it
  std::string description;
  std::string primary_category;
  std::vector<std::string> extra_categories;
  std::optional<std::string> recording_date;  // canonical "YYYY-MM-DD"
  std::optional<std::vector<std::string>> recordists;
  SourceArchive source_archive = SourceArchive::kOther;

  bool operator==(const Recording&) const = default;
};

// Immutable, ordered view of the manifest. Iteration order equals file order.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Recording> recordings);

  std::size_t size() const { return recordings_.size(); }
  bool empty() const { return recordings_.empty(); }
  const Recording& at(std::size_t pos) const { return recordings_.at(pos); }
  const std::vector<Recording>& recordings() const { return recordings_; }

  // Position of `id`, or nullopt when unknown.
  std::optional<std::size_t> find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id).has_value(); }

  auto begin() const { return recordings_.begin(); }
  auto end() const { return recordings_.end(); }

 private:
  std::vector<Recording> recordings_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Identity of one recording session: date + canonicalized recordists + topic.
struct SessionKey {
  std::string date;                     // "YYYY-MM-DD"
  std::vector<std::string> recordists;  // canonical form, sorted
  std::string topic;

  auto operator<=>(const SessionKey&) const = default;
};

// Parses a JSON Lines manifest. Throws ParseError (with line number) on a
// malformed record and IntegrityError on a duplicate id.
Catalog parse_manifest(const std::filesystem::path& path);

// Parses manifest text already in memory; `origin` names it in errors.
Catalog parse_manifest_text(const std::string& text,
                            const std::string& origin = "<memory>");

// Serializes a catalog back to JSON Lines (one object per line, keys sorted,
// "\n"-terminated). Round-trips through parse_manifest_text field-equal.
std::string manifest_to_jsonl(const Catalog& catalog);

// Lenient scan used by `leakaudit validate`: collects every problem instead
// of stopping at the first.
struct ManifestCheck {
  std::size_t record_count = 0;
  std::vector<std::string> problems;
  bool clean() const { return problems.empty(); }
};
ManifestCheck validate_manifest(const std::filesystem::path& path);

// Topic prefix of a description: the text before the first "-" that has
// whitespace on both sides. Hyphens inside words never split. Returns
// nullopt when no such dash exists or the prefix trims to nothing.
std::optional<std::string> extract_topic(const std::string& description);

// Canonical recordist name: trimmed, internal whitespace collapsed to one
// space, ASCII case-folded. Idempotent.
std::string canonicalize_recordist(const std::string& name);

// Session key iff date, recordists, and a topic are all present.
std::optional<SessionKey> session_key(const Recording& rec);

}  // namespace leakaudit
