// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "leakaudit/io_util.hpp"
#include "leakaudit/matcher.hpp"
#include "leakaudit/splitter.hpp"
#include "support/synthetic_corpus.hpp"

using namespace leakaudit;
namespace ts = leakaudit::testsupport;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = std::string(LEAKAUDIT_BIN) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_file);
  r.err = read_file(err_file);
  return r;
}

struct Pipeline {
  fs::path dir;
  ts::SyntheticCorpus corpus;
};

Pipeline& pipeline() {
  static Pipeline p = [] {
    Pipeline pl;
    pl.dir = fs::temp_directory_path() / "leakaudit_cli_e2e";
    fs::remove_all(pl.dir);
    // 8 base files + 2 exact-copy dupes = 10 recordings.
    pl.corpus = ts::generate_corpus(pl.dir / "corpus", 8, 21);
    return pl;
  }();
  return p;
}

}  // namespace

TEST_CASE("--version exits 0 and prints the version") {
  const fs::path dir = fs::temp_directory_path() / "leakaudit_cli_misc";
  fs::create_directories(dir);
  const RunResult r = run_cli("--version", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("leakaudit") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  const fs::path dir = fs::temp_directory_path() / "leakaudit_cli_misc";
  fs::create_directories(dir);
  CHECK(run_cli("--no-such-flag", dir).exit_code == 2);
  CHECK(run_cli("validate", dir).exit_code == 2);  // missing --manifest
  CHECK(run_cli("frobnicate", dir).exit_code == 2);
}

TEST_CASE("validate reports a clean manifest and flags a broken one") {
  Pipeline& pl = pipeline();
  const RunResult ok =
      run_cli("validate --manifest " + pl.corpus.manifest.string(), pl.dir);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("records: 10") != std::string::npos);

  const fs::path broken = pl.dir / "broken.jsonl";
  {
    std::ofstream f(broken);
    f << R"({"id":"a","audio_path":"a.wav","description":"d","primary_category":"c"})"
      << "\n{oops\n";
  }
  const RunResult bad =
      run_cli("validate --manifest " + broken.string(), pl.dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("problem:") != std::string::npos);
}

TEST_CASE("probe prints stream facts") {
  Pipeline& pl = pipeline();
  const fs::path wav = pl.dir / "corpus" / "base000.wav";
  const RunResult r = run_cli("probe " + wav.string(), pl.dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("16000 Hz") != std::string::npos);
  CHECK(r.out.find("1 channel") != std::string::npos);
  CHECK(run_cli("probe " + (pl.dir / "nothing.wav").string(), pl.dir)
            .exit_code == 1);
}

TEST_CASE("full pipeline produces consistent artifacts") {
  Pipeline& pl = pipeline();
  const std::string manifest = pl.corpus.manifest.string();
  const fs::path index = pl.dir / "corpus.lafp";
  const fs::path pairs = pl.dir / "pairs.jsonl";
  const fs::path groups = pl.dir / "groups.json";
  const fs::path splits = pl.dir / "splits.csv";
  const fs::path report = pl.dir / "report.json";
  const fs::path subset = pl.dir / "train_subset.txt";
  const fs::path subset_rand = pl.dir / "train_subset_rand.txt";

  CHECK(run_cli("index --manifest " + manifest + " --out " + index.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(fs::exists(index));

  CHECK(run_cli("dedup --index " + index.string() + " --manifest " + manifest +
                    " --out " + pairs.string(),
                pl.dir)
            .exit_code == 0);
  const auto found = pairs_from_jsonl(read_file(pairs), "pairs");
  REQUIRE(found.size() == pl.corpus.planted.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    CHECK(found[i].a == pl.corpus.planted[i].a);
    CHECK(found[i].b == pl.corpus.planted[i].b);
  }

  CHECK(run_cli("group --manifest " + manifest + " --pairs " + pairs.string() +
                    " --mode clean --out " + groups.string(),
                pl.dir)
            .exit_code == 0);

  CHECK(run_cli("split --manifest " + manifest + " --groups " +
                    groups.string() + " --seed 5 --out " + splits.string(),
                pl.dir)
            .exit_code == 0);
  const SplitAssignment split = splits_from_csv(read_file(splits), "splits");
  CHECK(split.split_of.size() == 10);

  CHECK(run_cli("audit --splits " + splits.string() + " --pairs " +
                    pairs.string() + " --report " + report.string() +
                    " --manifest " + manifest,
                pl.dir)
            .exit_code == 0);
  const std::string report_text = read_file(report);
  CHECK(report_text.find("\"cross_split_pairs\": 0") != std::string::npos);

  CHECK(run_cli("ablate --splits " + splits.string() + " --pairs " +
                    pairs.string() + " --mode dedup --out " + subset.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("ablate --splits " + splits.string() + " --pairs " +
                    pairs.string() + " --mode random --seed 3 --out " +
                    subset_rand.string(),
                pl.dir)
            .exit_code == 0);
  // Same removal count in both modes (dedup leak set is empty here, so both
  // keep the whole train split).
  CHECK(split_lines(read_file(subset)).size() ==
        split_lines(read_file(subset_rand)).size());

  // Idempotence: byte-identical artifacts on rerun.
  const std::string pairs_before = read_file(pairs);
  const std::string index_before = read_file(index);
  const std::string splits_before = read_file(splits);
  const std::string groups_before = read_file(groups);
  const std::string report_before = read_file(report);
  const std::string subset_before = read_file(subset_rand);
  CHECK(run_cli("index --manifest " + manifest + " --out " + index.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("dedup --index " + index.string() + " --manifest " + manifest +
                    " --out " + pairs.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("group --manifest " + manifest + " --pairs " + pairs.string() +
                    " --mode clean --out " + groups.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("split --manifest " + manifest + " --groups " +
                    groups.string() + " --seed 5 --out " + splits.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("audit --splits " + splits.string() + " --pairs " +
                    pairs.string() + " --report " + report.string() +
                    " --manifest " + manifest,
                pl.dir)
            .exit_code == 0);
  CHECK(run_cli("ablate --splits " + splits.string() + " --pairs " +
                    pairs.string() + " --mode random --seed 3 --out " +
                    subset_rand.string(),
                pl.dir)
            .exit_code == 0);
  CHECK(read_file(index) == index_before);
  CHECK(read_file(pairs) == pairs_before);
  CHECK(read_file(groups) == groups_before);
  CHECK(read_file(splits) == splits_before);
  CHECK(read_file(report) == report_before);
  CHECK(read_file(subset_rand) == subset_before);
}

TEST_CASE("a failing stage leaves no partial output") {
  Pipeline& pl = pipeline();
  const fs::path ghost_pairs = pl.dir / "ghost_pairs.jsonl";
  {
    std::ofstream f(ghost_pairs);
    f << R"({"a":"base000","b":"not-in-the-manifest"})" << "\n";
  }
  const fs::path out = pl.dir / "never_written.json";
  const RunResult r = run_cli("group --manifest " +
                                  pl.corpus.manifest.string() + " --pairs " +
                                  ghost_pairs.string() +
                                  " --mode clean --out " + out.string(),
                              pl.dir);
  CHECK(r.exit_code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("eval consumes similarity files and compares reports") {
  Pipeline& pl = pipeline();
  const fs::path sims = pl.dir / "sims.json";
  {
    std::ofstream f(sims);
    f << R"({"queries":["q0","q1","q2"],"items":["x","y","z"],
            "ground_truth":{"q0":"x","q1":"y","q2":"z"},
            "scores":[[9,1,0],[8,2,0],[0,1,5]]})";
  }
  const fs::path subset = pl.dir / "dupes.txt";
  {
    std::ofstream f(subset);
    f << "q0\nq2\n";
  }
  const fs::path out_full = pl.dir / "eval_full.json";
  const fs::path out_sub = pl.dir / "eval_sub.json";
  CHECK(run_cli("eval --sim " + sims.string() + " --k 1,2 --out " +
                    out_full.string(),
                pl.dir)
            .exit_code == 0);
  const RunResult sub =
      run_cli("eval --sim " + sims.string() + " --subset " + subset.string() +
                  " --k 1,2 --out " + out_sub.string() + " --compare-to " +
                  out_full.string(),
              pl.dir);
  CHECK(sub.exit_code == 0);
  CHECK(sub.out.find("delta") != std::string::npos);
  // q1 has rank 2 at truth "y" (score 2 < 8): full R@1 = 66.7, subset = 100.
  CHECK(read_file(out_sub).find("100.0") != std::string::npos);

  CHECK(run_cli("eval --sim " + (pl.dir / "none.json").string() + " --out " +
                    (pl.dir / "x.json").string(),
                pl.dir)
            .exit_code == 1);
}
