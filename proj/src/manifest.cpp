// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include "leakaudit/manifest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

#include "leakaudit/error.hpp"
#include "leakaudit/io_util.hpp"

namespace leakaudit {

using nlohmann::json;

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// "YYYY-MM-DD" with a plausible month/day; anything else is rejected and the
// recording is simply left ungrouped.
std::optional<std::string> parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    return std::nullopt;
  }
  const std::string y = s.substr(0, 4);
  const std::string m = s.substr(5, 2);
  const std::string d = s.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) {
    return std::nullopt;
  }
  const int month = std::stoi(m);
  const int day = std::stoi(d);
  if (month < 1 || month > 12 || day < 1 || day > 31) {
    return std::nullopt;
  }
  return s;
}

// Parses one manifest line into a Recording. Throws ParseError on any
// schema violation; the caller prefixes the line number.
Recording record_from_json(const json& obj) {
  if (!obj.is_object()) {
    throw ParseError("record is not a JSON object");
  }
  Recording rec;
  for (const char* key : {"id", "audio_path", "description", "primary_category"}) {
    if (!obj.contains(key) || !obj[key].is_string()) {
      throw ParseError(std::string("missing or non-string required key \"") +
                       key + "\"");
    }
  }
  rec.id = obj["id"].get<std::string>();
  rec.audio_path = obj["audio_path"].get<std::string>();
  rec.description = obj["description"].get<std::string>();
  rec.primary_category = obj["primary_category"].get<std::string>();
  if (rec.id.empty()) {
    throw ParseError("empty id");
  }
  if (rec.primary_category.empty()) {
    throw ParseError("empty primary_category for id \"" + rec.id + "\"");
  }
  if (obj.contains("extra_categories")) {
    const json& ec = obj["extra_categories"];
    if (!ec.is_array()) {
      throw ParseError("extra_categories must be an array");
    }
    for (const json& v : ec) {
      if (!v.is_string()) {
        throw ParseError("extra_categories entries must be strings");
      }
      rec.extra_categories.push_back(v.get<std::string>());
    }
  }
  if (obj.contains("duration_s")) {
    const json& d = obj["duration_s"];
    if (!d.is_number()) {
      throw ParseError("duration_s must be a number");
    }
    rec.duration_s = d.get<double>();
    if (!std::isfinite(rec.duration_s) || rec.duration_s < 0.0) {
      throw ParseError("duration_s must be finite and nonnegative");
    }
  }
  if (obj.contains("date") && obj["date"].is_string()) {
    rec.recording_date = parse_iso_date(obj["date"].get<std::string>());
  } else if (obj.contains("date") && !obj["date"].is_null()) {
    throw ParseError("date must be a string");
  }
  if (obj.contains("recordists") && !obj["recordists"].is_null()) {
    const json& rr = obj["recordists"];
    if (!rr.is_array()) {
      throw ParseError("recordists must be an array");
    }
    std::vector<std::string> names;
    for (const json& v : rr) {
      if (!v.is_string()) {
        throw ParseError("recordists entries must be strings");
      }
      names.push_back(v.get<std::string>());
    }
    if (!names.empty()) {
      rec.recordists = std::move(names);
    }
  }
  if (obj.contains("source_archive")) {
    const json& sa = obj["source_archive"];
    if (!sa.is_string()) {
      throw ParseError("source_archive must be a string");
    }
    const std::string v = sa.get<std::string>();
    if (v == "NHU") {
      rec.source_archive = SourceArchive::kNhu;
    } else if (v == "OTHER") {
      rec.source_archive = SourceArchive::kOther;
    } else {
      throw ParseError("source_archive must be \"NHU\" or \"OTHER\"");
    }
  }
  return rec;
}

json record_to_json(const Recording& rec) {
  json obj;
  obj["id"] = rec.id;
  obj["audio_path"] = rec.audio_path;
  obj["description"] = rec.description;
  obj["primary_category"] = rec.primary_category;
  obj["extra_categories"] = rec.extra_categories;
  if (rec.duration_s > 0.0) {
    obj["duration_s"] = rec.duration_s;
  }
  if (rec.recording_date) {
    obj["date"] = *rec.recording_date;
  }
  if (rec.recordists) {
    obj["recordists"] = *rec.recordists;
  }
  obj["source_archive"] =
      rec.source_archive == SourceArchive::kNhu ? "NHU" : "OTHER";
  return obj;
}

}  // namespace

Catalog::Catalog(std::vector<Recording> recordings)
    : recordings_(std::move(recordings)) {
  index_.reserve(recordings_.size());
  for (std::size_t i = 0; i < recordings_.size(); ++i) {
    auto [it, inserted] = index_.emplace(recordings_[i].id, i);
    if (!inserted) {
      throw IntegrityError("duplicate recording id \"" + recordings_[i].id +
                           "\"");
    }
  }
}

std::optional<std::size_t> Catalog::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

Catalog parse_manifest_text(const std::string& text,
                            const std::string& origin) {
  std::vector<Recording> recs;
  std::unordered_map<std::string, std::size_t> seen;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (trim(line).empty()) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(origin + ":" + std::to_string(i + 1) +
                       ": invalid JSON: " + e.what());
    }
    Recording rec;
    try {
      rec = record_from_json(obj);
    } catch (const ParseError& e) {
      throw ParseError(origin + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    auto [it, inserted] = seen.emplace(rec.id, i + 1);
    if (!inserted) {
      throw IntegrityError(origin + ": duplicate id \"" + rec.id +
                           "\" (lines " + std::to_string(it->second) + " and " +
                           std::to_string(i + 1) + ")");
    }
    recs.push_back(std::move(rec));
  }
  return Catalog(std::move(recs));
}

Catalog parse_manifest(const std::filesystem::path& path) {
  return parse_manifest_text(read_file(path), path.string());
}

std::string manifest_to_jsonl(const Catalog& catalog) {
  std::string out;
  for (const Recording& rec : catalog) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

ManifestCheck validate_manifest(const std::filesystem::path& path) {
  ManifestCheck check;
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    check.problems.push_back(e.what());
    return check;
  }
  const std::string origin = path.string();
  std::unordered_map<std::string, std::size_t> seen;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      check.problems.push_back(origin + ":" + std::to_string(i + 1) +
                               ": invalid JSON: " + e.what());
      continue;
    }
    Recording rec;
    try {
      rec = record_from_json(obj);
    } catch (const ParseError& e) {
      check.problems.push_back(origin + ":" + std::to_string(i + 1) + ": " +
                               e.what());
      continue;
    }
    ++check.record_count;
    auto [it, inserted] = seen.emplace(rec.id, i + 1);
    if (!inserted) {
      check.problems.push_back(
          origin + ": duplicate id \"" + rec.id + "\" (lines " +
          std::to_string(it->second) + " and " + std::to_string(i + 1) + ")");
    }
  }
  return check;
}

std::optional<std::string> extract_topic(const std::string& description) {
  for (std::size_t i = 1; i + 1 < description.size(); ++i) {
    if (description[i] == '-' && is_space(description[i - 1]) &&
        is_space(description[i + 1])) {
      std::string prefix = trim(description.substr(0, i));
      if (prefix.empty()) {
        return std::nullopt;
      }
      return prefix;
    }
  }
  return std::nullopt;
}

std::string canonicalize_recordist(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<SessionKey> session_key(const Recording& rec) {
  if (!rec.recording_date || !rec.recordists || rec.recordists->empty()) {
    return std::nullopt;
  }
  std::optional<std::string> topic = extract_topic(rec.description);
  if (!topic) {
    return std::nullopt;
  }
  SessionKey key;
  key.date = *rec.recording_date;
  for (const std::string& name : *rec.recordists) {
    std::string canon = canonicalize_recordist(name);
    if (!canon.empty()) {
      key.recordists.push_back(std::move(canon));
    }
  }
  if (key.recordists.empty()) {
    return std::nullopt;
  }
  std::sort(key.recordists.begin(), key.recordists.end());
  key.topic = *topic;
  return key;
}

}  // namespace leakaudit
