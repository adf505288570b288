// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "leakaudit/audio.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/fingerprint.hpp"
#include "leakaudit/grouping.hpp"
#include "leakaudit/io_util.hpp"
#include "leakaudit/manifest.hpp"
#include "leakaudit/matcher.hpp"
#include "leakaudit/retrieval.hpp"
#include "leakaudit/splitter.hpp"
#include "leakaudit/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace leakaudit;

enum class LogLevel { kDebug = 0, kInfo, kWarn, kError, kQuiet };

LogLevel g_log_level = LogLevel::kInfo;

void log_at(LogLevel level, const std::string& msg) {
  if (level < g_log_level) {
    return;
  }
  static const char* names[] = {"debug", "info", "warn", "error", "quiet"};
  std::cerr << "leakaudit [" << names[static_cast<int>(level)] << "] " << msg
            << "\n";
}
void log_info(const std::string& m) { log_at(LogLevel::kInfo, m); }
void log_warn(const std::string& m) { log_at(LogLevel::kWarn, m); }
void log_error(const std::string& m) { log_at(LogLevel::kError, m); }

LogLevel parse_log_level(const std::string& name) {
  if (name == "debug") return LogLevel::kDebug;
  if (name == "info") return LogLevel::kInfo;
  if (name == "warn") return LogLevel::kWarn;
  if (name == "error") return LogLevel::kError;
  if (name == "quiet") return LogLevel::kQuiet;
  throw ArgumentError("unknown log level \"" + name + "\"");
}

// Every run records the toolkit version, the exact invocation, and a
// checksum of each named input file.
void log_provenance(int argc, char** argv,
                    const std::vector<fs::path>& inputs) {
  std::string argv_line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) {
      argv_line += ' ';
    }
    argv_line += argv[i];
  }
  log_info(std::string("version ") + kVersion);
  log_info("invocation: " + argv_line);
  for (const fs::path& p : inputs) {
    try {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", crc32_of_file(p));
      log_info("input " + p.string() + " crc32=" + buf + " bytes=" +
               std::to_string(fs::file_size(p)));
    } catch (const std::exception& e) {
      log_warn("input " + p.string() + ": " + e.what());
    }
  }
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    if (!tok.empty()) {
      try {
        ks.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ArgumentError("bad k value \"" + tok + "\"");
      }
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  if (ks.empty()) {
    throw ArgumentError("empty k list");
  }
  return ks;
}

std::vector<std::string> read_id_lines(const fs::path& path) {
  std::vector<std::string> ids;
  for (const std::string& line : split_lines(read_file(path))) {
    if (!line.empty()) {
      ids.push_back(line);
    }
  }
  return ids;
}

int run_validate(const fs::path& manifest) {
  const ManifestCheck check = validate_manifest(manifest);
  std::cout << "records: " << check.record_count << "\n";
  for (const std::string& problem : check.problems) {
    std::cout << "problem: " << problem << "\n";
  }
  if (!check.clean()) {
    std::cout << "integrity errors: " << check.problems.size() << "\n";
    return 1;
  }
  std::cout << "manifest clean\n";
  return 0;
}

int run_probe(const fs::path& file) {
  const DecodedAudio audio = decode_wav(file);
  std::printf("%s: %.3f s, %zu channel(s), %u Hz, %u-bit\n",
              file.string().c_str(), audio.duration_s(),
              audio.channels.size(), audio.sample_rate,
              audio.bits_per_sample);
  return 0;
}

int run_index(const fs::path& manifest, const fs::path& out,
              const std::string& audio_root, unsigned threads) {
  const Catalog catalog = parse_manifest(manifest);
  fs::path root = audio_root.empty() ? manifest.parent_path()
                                     : fs::path(audio_root);
  if (root.empty()) {
    root = ".";
  }
  const IndexBuildResult result =
      build_index(catalog, root, FingerprintParams{}, threads);
  for (const SkippedRecording& s : result.skipped) {
    log_warn("skipped " + s.id + ": " + s.reason);
  }
  save_index(result.index, out);
  std::cout << "indexed " << result.index.rec_table.size() << " recordings ("
            << result.index.total_landmarks() << " landmarks, "
            << result.skipped.size() << " skipped) -> " << out.string()
            << "\n";
  return 0;
}

int run_dedup(const fs::path& index_path, const fs::path& manifest,
              const fs::path& out, std::uint32_t min_score,
              double min_coverage, unsigned threads) {
  const FingerprintIndex index = load_index(index_path);
  const Catalog catalog = parse_manifest(manifest);
  for (const IndexedRecording& rec : index.rec_table) {
    if (!catalog.contains(rec.id)) {
      throw IntegrityError("index recording \"" + rec.id +
                           "\" is not in the manifest");
    }
  }
  MatcherParams params;
  params.min_score = min_score;
  params.min_coverage = min_coverage;
  const std::vector<DuplicatePair> pairs =
      find_duplicates(index, params, threads);
  atomic_write(out, pairs_to_jsonl(pairs));
  std::cout << "accepted " << pairs.size() << " duplicate pair(s) -> "
            << out.string() << "\n";
  return 0;
}

int run_group(const fs::path& manifest, const fs::path& pairs_path,
              const std::string& mode_name, const fs::path& out) {
  const GroupMode mode = group_mode_from_name(mode_name);
  const Catalog catalog = parse_manifest(manifest);
  const std::vector<DuplicatePair> pairs =
      pairs_from_jsonl(read_file(pairs_path), pairs_path.string());
  GroupAssignment groups = groups_from_pairs(catalog, pairs);
  if (mode == GroupMode::kGroupFiltered) {
    const auto sessions = session_groups(catalog);
    std::size_t keyed = 0;
    std::size_t keyed_in_multi = 0;
    for (const auto& [key, members] : sessions) {
      keyed += members.size();
      if (members.size() > 1) {
        keyed_in_multi += members.size();
      }
    }
    log_info("session metadata: " + std::to_string(keyed) +
             " recordings keyed, " + std::to_string(keyed_in_multi) +
             " in buckets of size >= 2");
    groups = merge_group_sources(groups, sessions);
  }
  atomic_write(out, groups_to_json(groups));
  std::size_t multi = 0;
  for (const auto& [gid, members] : groups.groups) {
    if (members.size() > 1) {
      ++multi;
    }
  }
  std::cout << group_mode_name(mode) << ": " << groups.groups.size()
            << " group(s), " << multi << " with >= 2 members -> "
            << out.string() << "\n";
  return 0;
}

int run_split(const fs::path& manifest, const fs::path& groups_path,
              std::uint64_t seed, const fs::path& out) {
  const Catalog catalog = parse_manifest(manifest);
  const GroupAssignment groups =
      groups_from_json(read_file(groups_path), groups_path.string());
  SplitSpec spec;
  spec.seed = seed;
  const SplitAssignment split = split_groups(catalog, groups, spec);
  atomic_write(out, splits_to_csv(split, catalog));
  std::cout << "split sizes: train " << split.count(Split::kTrain) << ", val "
            << split.count(Split::kVal) << ", test "
            << split.count(Split::kTest) << " -> " << out.string() << "\n";
  return 0;
}

int run_audit(const fs::path& splits_path, const fs::path& pairs_path,
              const fs::path& report_path, const std::string& manifest) {
  const SplitAssignment split =
      splits_from_csv(read_file(splits_path), splits_path.string());
  const std::vector<DuplicatePair> pairs =
      pairs_from_jsonl(read_file(pairs_path), pairs_path.string());
  Catalog catalog;
  const bool have_catalog = !manifest.empty();
  if (have_catalog) {
    catalog = parse_manifest(manifest);
  }
  const LeakageReport report =
      audit_leakage(split, pairs, have_catalog ? &catalog : nullptr);
  atomic_write(report_path, leakage_report_to_json(report));
  std::cout << "cross_split_pairs: " << report.cross_split_pairs << " ("
            << report.duplicates_in_eval.size()
            << " eval ids with a train-side duplicate) -> "
            << report_path.string() << "\n";
  return 0;
}

int run_ablate(const fs::path& splits_path, const fs::path& pairs_path,
               const std::string& mode, std::uint64_t seed,
               const fs::path& out) {
  const SplitAssignment split =
      splits_from_csv(read_file(splits_path), splits_path.string());
  const std::vector<DuplicatePair> pairs =
      pairs_from_jsonl(read_file(pairs_path), pairs_path.string());
  const TrainSubset dedup = deduplicated_train(split, pairs);
  TrainSubset subset;
  if (mode == "dedup") {
    subset = dedup;
  } else if (mode == "random") {
    subset = random_reduced_train(split, dedup.removed, seed);
  } else {
    throw ArgumentError("unknown ablate mode \"" + mode +
                        "\" (expected dedup or random)");
  }
  std::string text;
  for (const std::string& id : subset.ids) {
    text += id;
    text += '\n';
  }
  atomic_write(out, text);
  std::cout << mode << ": kept " << subset.ids.size() << ", removed "
            << subset.removed << " -> " << out.string() << "\n";
  return 0;
}

int run_eval(const fs::path& sim_path, const std::string& subset_path,
             const std::string& k_list, const fs::path& out,
             const std::string& compare_to) {
  const SimilarityMatrix sim = load_similarity(sim_path);
  const std::vector<int> ks = parse_k_list(k_list);
  EvalReport report;
  if (subset_path.empty()) {
    report = full_report(sim, ks);
  } else {
    report = subset_report(sim, read_id_lines(subset_path), ks,
                           fs::path(subset_path).filename().string());
  }
  atomic_write(out, eval_report_to_json(report));
  std::cout << eval_report_to_text(report);
  if (!compare_to.empty()) {
    const EvalReport baseline =
        eval_report_from_json(read_file(compare_to), compare_to);
    const ReportDelta delta = compare_reports(baseline, report);
    std::cout << delta.to_text();
  }
  std::cout << "-> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leakaudit: duplicate detection, leakage-free splits, and "
               "retrieval evaluation for audio datasets"};
  app.set_version_flag("--version",
                       std::string("leakaudit ") + kVersion);
  app.require_subcommand(1);

  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string log_level = "info";
  app.add_option("--threads", threads,
                 "worker threads for index and dedup")
      ->capture_default_str();
  app.add_option("--seed", seed, "seed for split and ablate")
      ->capture_default_str();
  app.add_option("--log-level", log_level, "debug|info|warn|error|quiet")
      ->capture_default_str();

  std::string manifest;
  std::string out;
  std::string probe_file;
  std::string audio_root;
  std::string index_path;
  std::string pairs_path;
  std::string mode;
  std::string splits_path;
  std::string report_path;
  std::string groups_path;
  std::string sim_path;
  std::string subset_path;
  std::string k_list = "1,5,10";
  std::string compare_to;
  std::uint32_t min_score = 25;
  double min_coverage = 0.5;

  CLI::App* validate = app.add_subcommand(
      "validate", "check a manifest for integrity problems");
  validate->add_option("--manifest", manifest, "JSON Lines manifest")
      ->required();

  CLI::App* probe =
      app.add_subcommand("probe", "print duration, channels, native rate");
  probe->add_option("file", probe_file, "WAV file")->required();

  CLI::App* index =
      app.add_subcommand("index", "fingerprint a corpus into a .lafp index");
  index->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  index->add_option("--out", out, "output index path")->required();
  index->add_option("--audio-root", audio_root,
                    "base for relative audio paths (default: manifest dir)");

  CLI::App* dedup = app.add_subcommand(
      "dedup", "find duplicate pairs with the score/coverage heuristic");
  dedup->add_option("--index", index_path, "LAFP index")->required();
  dedup->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  dedup->add_option("--out", out, "output pairs.jsonl")->required();
  dedup->add_option("--min-score", min_score, "minimum matched landmark count")
      ->capture_default_str();
  dedup->add_option("--min-coverage", min_coverage,
                    "matched-seconds share that must be exceeded")
      ->capture_default_str();

  CLI::App* group =
      app.add_subcommand("group", "build duplicate/session groups");
  group->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  group->add_option("--pairs", pairs_path, "pairs.jsonl from dedup")
      ->required();
  group->add_option("--mode", mode, "clean|group-filtered")->required();
  group->add_option("--out", out, "output groups.json")->required();

  CLI::App* split = app.add_subcommand(
      "split", "stratified group-atomic train/val/test split");
  split->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  split->add_option("--groups", groups_path, "groups.json")->required();
  split->add_option("--out", out, "output splits.csv")->required();

  CLI::App* audit =
      app.add_subcommand("audit", "report duplicate leakage across a split");
  audit->add_option("--splits", splits_path, "splits.csv")->required();
  audit->add_option("--pairs", pairs_path, "pairs.jsonl")->required();
  audit->add_option("--report", report_path, "output report.json")->required();
  audit->add_option("--manifest", manifest,
                    "optional manifest for per-category tables");

  CLI::App* ablate = app.add_subcommand(
      "ablate", "build deduplicated or random-reduced training subsets");
  ablate->add_option("--splits", splits_path, "splits.csv")->required();
  ablate->add_option("--pairs", pairs_path, "pairs.jsonl")->required();
  ablate->add_option("--mode", mode, "dedup|random")->required();
  ablate->add_option("--out", out, "output id list")->required();

  CLI::App* eval =
      app.add_subcommand("eval", "recall@k from a similarity matrix");
  eval->add_option("--sim", sim_path, "similarity JSON (+ optional sidecar)")
      ->required();
  eval->add_option("--subset", subset_path, "query id list (one per line)");
  eval->add_option("--k", k_list, "comma-separated k values")
      ->capture_default_str();
  eval->add_option("--out", out, "output report.json")->required();
  eval->add_option("--compare-to", compare_to,
                   "baseline report.json to diff against");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);  // --help / --version
    }
    app.exit(e);
    return 2;
  }

  try {
    g_log_level = parse_log_level(log_level);

    std::vector<fs::path> inputs;
    for (const std::string& p :
         {manifest, index_path, pairs_path, splits_path, groups_path, sim_path,
          subset_path, probe_file, compare_to}) {
      if (!p.empty()) {
        inputs.push_back(p);
      }
    }
    log_provenance(argc, argv, inputs);

    if (*validate) {
      return run_validate(manifest);
    }
    if (*probe) {
      return run_probe(probe_file);
    }
    if (*index) {
      return run_index(manifest, out, audio_root, threads);
    }
    if (*dedup) {
      return run_dedup(index_path, manifest, out, min_score, min_coverage,
                       threads);
    }
    if (*group) {
      return run_group(manifest, pairs_path, mode, out);
    }
    if (*split) {
      return run_split(manifest, groups_path, seed, out);
    }
    if (*audit) {
      return run_audit(splits_path, pairs_path, report_path, manifest);
    }
    if (*ablate) {
      return run_ablate(splits_path, pairs_path, mode, seed, out);
    }
    if (*eval) {
      return run_eval(sim_path, subset_path, k_list, out, compare_to);
    }
    log_error("no subcommand selected");
    return 2;
  } catch (const ArgumentError& e) {
    log_error(e.what());
    return 2;
  } catch (const Error& e) {
    log_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    log_error(std::string("unexpected failure: ") + e.what());
    return 1;
  }
}
