#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "sentiflow/fixture.hpp"
#include "sentiflow/pipeline.hpp"

namespace {

using namespace sentiflow;
using pipeline::Stage;

const fs::path kSource = SENTIFLOW_SOURCE_DIR;
const fs::path kFixture = kSource / "fixtures" / "synthetic";
const fs::path kGolden = kSource / "tests" / "golden";

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / fmt::format("sentiflow_pipeline_{}_{}", ::getpid(), counter++);
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Relative path -> bytes for every file under `root`, skipping run bookkeeping.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == "run_manifest.json" || rel == ".lock") continue;
    out[rel] = read_text_file(e.path());
  }
  return out;
}

RunConfig fixture_config() { return load_config(kFixture / "config.yaml"); }

void run_all(const fs::path& out) {
  pipeline::Runner r(fixture_config(), out);
  r.execute({pipeline::kAllStages.begin(), pipeline::kAllStages.end()}, true);
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::Io;
}

TEST(Fixture, RegenerationMatchesCommittedCopy) {
  TempDir dir;
  auto manifest = fixture::generate(dir.path());
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), fixture::kDefaultSeed);
  auto fresh = snapshot(dir.path());
  std::map<std::string, std::string> committed;
  for (const auto& [rel, bytes] : snapshot(kFixture))
    if (rel.rfind("out/", 0) != 0) committed[rel] = bytes;
  EXPECT_EQ(fresh, committed);
}

TEST(Fixture, DifferentSeedChangesCorpusOnly) {
  TempDir a, b;
  fixture::generate(a.path(), 1);
  fixture::generate(b.path(), 2);
  EXPECT_NE(read_text_file(a.path() / "macro.csv"), read_text_file(b.path() / "macro.csv"));
  EXPECT_EQ(read_text_file(a.path() / "external_scores.csv"), read_text_file(b.path() / "external_scores.csv"));
  EXPECT_EQ(read_text_file(a.path() / "futures.csv"), read_text_file(b.path() / "futures.csv"));
}

TEST(Pipeline, FullRunMatchesGoldenFiles) {
  TempDir out;
  run_all(out.path());
  auto got = snapshot(out.path());
  auto want = snapshot(kGolden);
  ASSERT_FALSE(want.empty());
  EXPECT_EQ(got.size(), want.size());
  for (const auto& [rel, bytes] : want) {
    ASSERT_TRUE(got.count(rel)) << rel;
    EXPECT_EQ(got[rel], bytes) << rel;
  }
}

TEST(Pipeline, RepeatedRunsAreByteIdentical) {
  TempDir a, b;
  run_all(a.path());
  run_all(b.path());
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
  run_all(a.path());
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST(Pipeline, PlantedAlphaAndLeadLagAppearInReports) {
  TempDir out;
  run_all(out.path());
  auto t5 = read_delimited(out.path() / pipeline::files::kAlpha);
  int seen = 0;
  for (const auto& row : t5.rows) {
    if (row[*t5.column("method")] != "BERTk2") continue;
    ++seen;
    EXPECT_NEAR(*try_parse_double(row[*t5.column("alpha")]), 0.3, 1e-8);
  }
  EXPECT_EQ(seen, 3);
  auto t8 = read_delimited(out.path() / pipeline::files::kLeadLag);
  ASSERT_EQ(t8.rows.size(), 6u);
  for (const auto& row : t8.rows) {
    EXPECT_EQ(row[*t8.column("abs_mean")], "3");
    EXPECT_EQ(row[*t8.column("signed_mean")], "-3");
  }
}

TEST(Pipeline, StagedRunEqualsComposedRun) {
  TempDir composed, staged;
  run_all(composed.path());
  auto cfg = fixture_config();
  for (Stage s : pipeline::kAllStages) {
    pipeline::Runner r(cfg, staged.path());
    r.execute({s}, false);
  }
  EXPECT_EQ(snapshot(composed.path()), snapshot(staged.path()));
}

TEST(Pipeline, ScoreThenIndexEqualsFirstTwoStagesOfRun) {
  TempDir composed, staged;
  run_all(composed.path());
  auto cfg = fixture_config();
  pipeline::Runner(cfg, staged.path()).execute({Stage::Score}, false);
  pipeline::Runner(cfg, staged.path()).execute({Stage::Index}, false);
  auto a = snapshot(composed.path()), b = snapshot(staged.path());
  for (const auto& rel : {pipeline::files::kMeetingScores, pipeline::files::kSentenceScores,
                          pipeline::files::kMonthlyIndex})
    EXPECT_EQ(a.at(std::string(rel)), b.at(std::string(rel))) << rel;
  EXPECT_FALSE(fs::exists(staged.path() / "regress"));
}

TEST(Pipeline, ReportRegeneratedFromCacheIsByteIdentical) {
  TempDir out;
  run_all(out.path());
  auto before = snapshot(out.path() / "report");
  fs::remove_all(out.path() / "report");
  pipeline::Runner(fixture_config(), out.path()).execute({Stage::Report}, false);
  auto after = snapshot(out.path() / "report");
  ASSERT_FALSE(before.empty());
  EXPECT_EQ(before, after);
  for (const auto& [rel, bytes] : before)
    EXPECT_EQ(sha256_hex(bytes), sha256_hex(after[rel])) << rel;
}

TEST(Pipeline, EveryTableCarriesUnitsAndDigest) {
  TempDir out;
  pipeline::Runner r(fixture_config(), out.path());
  r.execute({pipeline::kAllStages.begin(), pipeline::kAllStages.end()}, true);
  int tables = 0;
  for (const auto& [rel, bytes] : snapshot(out.path())) {
    if (fs::path(rel).extension() != ".csv") continue;
    ++tables;
    auto first = bytes.substr(0, bytes.find('\n'));
    EXPECT_EQ(first.rfind("# table=", 0), 0u) << rel;
    EXPECT_NE(first.find(" units="), std::string::npos) << rel;
    EXPECT_NE(first.find("config_digest=" + r.digest()), std::string::npos) << rel;
  }
  EXPECT_EQ(tables, 10);
}

TEST(Pipeline, ManifestRecordsInputsStagesAndRows) {
  TempDir out;
  pipeline::Runner r(fixture_config(), out.path());
  r.execute({pipeline::kAllStages.begin(), pipeline::kAllStages.end()}, true);
  auto m = json::parse(read_text_file(out.path() / pipeline::files::kManifest));
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["config_digest"], r.digest());
  EXPECT_EQ(m["inputs"]["macro"]["sha256"], sha256_file(kFixture / "macro.csv"));
  EXPECT_EQ(m["inputs"]["corpus"]["files"].size(), 40u);
  ASSERT_EQ(m["stages"].size(), 6u);
  for (const auto& s : m["stages"]) EXPECT_EQ(s["status"], "ok");
  EXPECT_EQ(m["stages"][1]["rows"]["index/monthly_index.csv"], 60);
  EXPECT_GE(m["wall_time_seconds"].get<double>(), 0.0);
}

TEST(Pipeline, MissingMacroIsConfigErrorNamingPath) {
  auto cfg = fixture_config();
  cfg.macro = InputPath{"no_such_macro.csv", kFixture};
  TempDir out;
  std::string msg;
  EXPECT_EQ(kind_of([&] { pipeline::Runner(cfg, out.path()).execute({Stage::Score}, false); }, &msg),
            ErrorKind::Config);
  EXPECT_NE(msg.find("no_such_macro.csv"), std::string::npos) << msg;
  EXPECT_EQ(exit_code(ErrorKind::Config), 2);
}

TEST(Pipeline, MissingUpstreamArtifactIsDependencyError) {
  TempDir out;
  std::string msg;
  EXPECT_EQ(kind_of([&] { pipeline::Runner(fixture_config(), out.path()).execute({Stage::Index}, false); }, &msg),
            ErrorKind::Dependency);
  EXPECT_NE(msg.find("meeting_scores.csv"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'index'"), std::string::npos) << msg;

  pipeline::Runner(fixture_config(), out.path()).execute({Stage::Score, Stage::Index}, false);
  EXPECT_EQ(kind_of([&] { pipeline::Runner(fixture_config(), out.path()).execute({Stage::Bounded}, false); }, &msg),
            ErrorKind::Dependency);
  EXPECT_NE(msg.find("table5_alpha.csv"), std::string::npos) << msg;
}

TEST(Pipeline, FailingStageIsQuarantinedAndNamed) {
  TempDir work, out;
  auto macro = read_text_file(kFixture / "macro.csv");
  std::istringstream lines(macro);
  std::string line, broken;
  while (std::getline(lines, line)) broken += line.substr(0, line.rfind(',')) + "\n";  // drops COIL
  write_text_file(work.path() / "macro.csv", broken);
  auto cfg = fixture_config();
  cfg.macro = InputPath{(work.path() / "macro.csv").string(), {}};
  std::string msg;
  auto kind = kind_of(
      [&] { pipeline::Runner(cfg, out.path()).execute({pipeline::kAllStages.begin(), pipeline::kAllStages.end()}, true); },
      &msg);
  EXPECT_EQ(kind, ErrorKind::Format);
  EXPECT_EQ(exit_code(kind), 3);
  EXPECT_NE(msg.find("stage 'regress'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("COIL"), std::string::npos) << msg;
  EXPECT_TRUE(fs::exists(out.path() / "quarantine" / "regress" / "error.txt"));
  EXPECT_FALSE(fs::exists(out.path() / "regress"));
  EXPECT_FALSE(fs::exists(out.path() / "bounded"));
  EXPECT_TRUE(fs::exists(out.path() / pipeline::files::kMonthlyIndex));
  auto m = json::parse(read_text_file(out.path() / pipeline::files::kManifest));
  EXPECT_EQ(m["stages"].back()["stage"], "regress");
  EXPECT_EQ(m["stages"].back()["status"], "failed");
}

TEST(Pipeline, UnconfiguredOptionalStagesAreSkippedByRun) {
  auto cfg = fixture_config();
  cfg.macro.reset();
  TempDir out;
  pipeline::Runner r(cfg, out.path());
  r.execute({pipeline::kAllStages.begin(), pipeline::kAllStages.end()}, true);
  std::map<std::string, std::string> status;
  for (const auto& rec : r.records()) status[std::string(to_string(rec.stage))] = rec.status;
  EXPECT_EQ(status["regress"], "skipped");
  EXPECT_EQ(status["bounded"], "skipped");
  EXPECT_EQ(status["leadlag"], "ok");
  EXPECT_EQ(status["report"], "ok");
  EXPECT_EQ(kind_of([&] { pipeline::Runner(cfg, out.path()).execute({Stage::Regress}, false); }),
            ErrorKind::Config);
}

TEST(Pipeline, RunDirectoryLockRejectsConcurrentRun) {
  TempDir out;
  pipeline::RunLock held(out.path());
  std::string msg;
  EXPECT_EQ(kind_of([&] { pipeline::Runner(fixture_config(), out.path()).execute({Stage::Score}, false); }, &msg),
            ErrorKind::Config);
  EXPECT_NE(msg.find("locked"), std::string::npos);
}

TEST(Pipeline, LockIsReleasedAfterRun) {
  TempDir out;
  pipeline::Runner(fixture_config(), out.path()).execute({Stage::Score}, false);
  EXPECT_NO_THROW(pipeline::RunLock again(out.path()));
}

TEST(Pipeline, OutputRootPrecedence) {
  RunConfig cfg;
  cfg.output = "from_config";
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output(cfg, std::nullopt), fs::path("from_config"));
  ::setenv(kOutputRootEnv, "from_env", 1);
  EXPECT_EQ(resolve_output(cfg, std::nullopt), fs::path("from_env"));
  EXPECT_EQ(resolve_output(cfg, fs::path("from_flag")), fs::path("from_flag"));
  ::unsetenv(kOutputRootEnv);
}

TEST(Pipeline, ConfigDigestIgnoresOutputButTracksSettings) {
  auto a = fixture_config(), b = fixture_config();
  b.output = "/elsewhere";
  EXPECT_EQ(a.digest(), b.digest());
  b.bands = {3, 6};
  EXPECT_NE(a.digest(), b.digest());
}

std::string harmonic_file(std::size_t n, double shift) {
  std::string out = "month,value\n";
  for (std::size_t t = 0; t < n; ++t)
    out += fmt::format("{},{}\n", format_month(YearMonth{2010, 1}.plus(static_cast<int>(t))),
                       format_exact(std::cos(2.0 * std::numbers::pi * 2.0 * (static_cast<double>(t) - 7.0 - shift) /
                                             static_cast<double>(n))));
  return out;
}

TEST(Pipeline, StandaloneLeadLagWithoutCorpus) {
  TempDir dir;
  write_text_file(dir.path() / "x.csv", harmonic_file(60, 0));
  write_text_file(dir.path() / "y.csv", harmonic_file(60, 3));
  auto bands = spectral::bands_from_cutoffs(std::vector<std::size_t>{3, 6, 12});
  auto st = pipeline::standalone_leadlag(dir.path() / "x.csv", dir.path() / "y.csv", bands, ReportMode::Abs);
  st.commit(dir.path() / "out", Stage::LeadLag);
  auto t8 = read_delimited(dir.path() / "out" / pipeline::files::kLeadLag);
  EXPECT_FALSE(t8.column("signed_mean"));
  ASSERT_EQ(t8.rows.size(), 6u);
  for (const auto& row : t8.rows) EXPECT_EQ(row[*t8.column("abs_mean")], "3");

  auto again = pipeline::standalone_leadlag(dir.path() / "x.csv", dir.path() / "y.csv", bands, ReportMode::Abs);
  EXPECT_EQ(st.files(), again.files());
}

TEST(Pipeline, StandaloneLeadLagRejectsGappedMonths) {
  TempDir dir;
  write_text_file(dir.path() / "x.csv", "month,v\n2010-01,1\n2010-03,2\n");
  EXPECT_EQ(kind_of([&] { pipeline::read_value_series(dir.path() / "x.csv"); }), ErrorKind::Alignment);
}

TEST(Cli, ExitCodesAndStageNames) {
  const std::string cli = SENTIFLOW_CLI;
  TempDir dir;
  auto sh = [&](const std::string& args) {
    int status = std::system(fmt::format("'{}' {} >/dev/null 2>&1", cli, args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(sh(fmt::format("run -q -c '{}' --out '{}'", (kFixture / "config.yaml").string(),
                           (dir.path() / "ok").string())),
            0);
  EXPECT_EQ(snapshot(dir.path() / "ok"), snapshot(kGolden));
  EXPECT_EQ(sh(fmt::format("index -q -c '{}' --out '{}'", (kFixture / "config.yaml").string(),
                           (dir.path() / "empty").string())),
            2);
  EXPECT_EQ(sh(fmt::format("run -q -c '{}' --macro /no/such/macro.csv --out '{}'",
                           (kFixture / "config.yaml").string(), (dir.path() / "bad").string())),
            2);
  EXPECT_EQ(sh("run -q -c /no/such/config.yaml"), 2);
  EXPECT_EQ(sh("bogus"), 2);

  ::setenv(kOutputRootEnv, (dir.path() / "env").c_str(), 1);
  EXPECT_EQ(sh(fmt::format("score -q -c '{}'", (kFixture / "config.yaml").string())), 0);
  ::unsetenv(kOutputRootEnv);
  EXPECT_TRUE(fs::exists(dir.path() / "env" / pipeline::files::kMeetingScores));
}

}  // namespace
