#include <doctest.h>

#include <cstdlib>
#include <regex>
#include <sstream>

#include "gigaudit/anonymize.hpp"
#include "gigaudit/commands.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::tree_bytes;
using testsupport::write_file;
namespace fs = std::filesystem;

namespace {

// One small fixture shared by the command tests.
const fs::path& fixture() {
  static TempDir dir("cmdfix");
  static bool made = false;
  if (!made) {
    write_file(dir / "config.json",
               R"({"seed": 9, "n_drivers": 4, "months": "2021-11:2023-04", "jitter_seconds": 90,
                   "active_day_probability": 0.3,
                   "cohort": {"pre": "2021-11:2021-12", "post": "2023-03:2023-04"}})");
    std::ostringstream log;
    REQUIRE(cmd_synth(dir / "config.json", dir.path(), log) == kExitOk);
    made = true;
  }
  return dir.path();
}

AuditArgs audit_args(const fs::path& out) {
  AuditArgs a;
  a.root = fixture() / "bundles";
  a.out = out;
  return a;
}

}  // namespace

TEST_CASE("synth writes one directory per driver") {
  std::size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(fixture() / "bundles")) dirs += e.is_directory();
  CHECK(dirs == 4);
  CHECK(fs::exists(fixture() / "ground_truth.json"));
}

TEST_CASE("synth config errors exit 2") {
  TempDir tmp("cmd");
  std::ostringstream log;
  CHECK(cmd_synth(tmp / "nope.json", tmp / "out", log) == kExitBadConfig);
  CHECK(log.str().find("not found") != std::string::npos);
  write_file(tmp / "bad.json", R"({"n_drivers": -1})");
  CHECK(cmd_synth(tmp / "bad.json", tmp / "out", log) == kExitBadConfig);
  write_file(tmp / "junk.json", "{not json");
  CHECK(cmd_synth(tmp / "junk.json", tmp / "out", log) == kExitBadConfig);
}

TEST_CASE("synth repeats byte for byte") {
  TempDir a("cmd"), b("cmd");
  std::ostringstream log;
  REQUIRE(cmd_synth(fixture() / "config.json", a.path(), log) == kExitOk);
  REQUIRE(cmd_synth(fixture() / "config.json", b.path(), log) == kExitOk);
  CHECK(tree_bytes(a.path()) == tree_bytes(b.path()));
}

TEST_CASE("audit report has every section and is stable") {
  TempDir a("cmd"), b("cmd");
  std::ostringstream log;
  auto args = audit_args(a.path());
  args.csv = true;
  args.charts = true;
  args.cohort_pre = "2021-11:2021-12";
  args.cohort_post = "2023-03:2023-04";
  REQUIRE(cmd_audit(args, log) == kExitOk);
  const auto report = nlohmann::json::parse(read_file(a / "audit_report.json"));
  for (const char* k : {"meta", "ingest", "linkage", "pay_per_hour", "utilisation", "take_rates", "surplus",
                        "per_minute_split", "cohort", "acceptance", "demographics"}) {
    CAPTURE(k);
    CHECK(report.contains(k));
  }
  CHECK(report["meta"]["drivers"].size() == 4);
  CHECK(fs::exists(a / "csv" / "weekly_pay.csv"));
  CHECK(fs::exists(a / "charts" / "surplus.svg"));
  CHECK(read_file(a / "charts" / "pay_per_hour.svg").rfind("<svg", 0) == 0);

  args.out = b.path();
  args.common.jobs = 3;
  REQUIRE(cmd_audit(args, log) == kExitOk);
  CHECK(tree_bytes(a.path()) == tree_bytes(b.path()));
}

TEST_CASE("shrinking the link window leaves more payments unmatched") {
  TempDir a("cmd"), b("cmd");
  std::ostringstream log;
  REQUIRE(cmd_audit(audit_args(a.path()), log) == kExitOk);
  auto narrow = audit_args(b.path());
  narrow.common.link_window_seconds = 1;
  REQUIRE(cmd_audit(narrow, log) == kExitOk);
  const auto wide = nlohmann::json::parse(read_file(a / "audit_report.json"));
  const auto tight = nlohmann::json::parse(read_file(b / "audit_report.json"));
  CHECK(tight["linkage"]["unmatched_payments"].get<long>() > wide["linkage"]["unmatched_payments"].get<long>());
}

TEST_CASE("audit argument and data errors") {
  TempDir tmp("cmd");
  std::ostringstream log;
  auto args = audit_args(tmp / "o");
  args.root = tmp / "missing";
  CHECK(cmd_audit(args, log) == kExitNoData);
  fs::create_directories(tmp / "empty");
  args.root = tmp / "empty";
  CHECK(cmd_audit(args, log) == kExitNoData);

  args = audit_args(tmp / "o");
  args.common.era_boundaries = "2023-02,2022-02";
  CHECK(cmd_audit(args, log) == kExitBadConfig);
  args = audit_args(tmp / "o");
  args.cohort_pre = "2021-11:2021-12";
  CHECK(cmd_audit(args, log) == kExitBadConfig);
  args.cohort_post = "2021-12:2022-01";
  CHECK(cmd_audit(args, log) == kExitBadConfig);
  args = audit_args(tmp / "o");
  args.weeks = "sunday";
  CHECK(cmd_audit(args, log) == kExitBadConfig);
  args = audit_args(tmp / "o");
  args.rpi = tmp / "no_rpi.csv";
  CHECK(cmd_audit(args, log) == kExitBadConfig);
}

TEST_CASE("a broken bundle is skipped and logged") {
  TempDir tmp("cmd");
  fs::copy(fixture() / "bundles", tmp / "root", fs::copy_options::recursive);
  write_file(tmp / "root" / "zz_broken" / "notes.csv", "a\n1\n");
  std::ostringstream log;
  auto args = audit_args(tmp / "o");
  args.root = tmp / "root";
  CHECK(cmd_audit(args, log) == kExitOk);
  CHECK(log.str().find("zz_broken") != std::string::npos);
  const auto report = nlohmann::json::parse(read_file(tmp / "o" / "audit_report.json"));
  CHECK(report["meta"]["bundles_found"] == 5);
  CHECK(report["meta"]["bundles_processed"] == 4);
}

TEST_CASE("predict writes matrices and refuses a single year") {
  TempDir tmp("cmd");
  std::ostringstream log;
  PredictArgs p;
  p.root = fixture() / "bundles";
  p.out = tmp / "pred";
  CHECK(cmd_predict(p, log) == kExitOk);
  for (const char* f : {"year_matrix_single_year.csv", "year_matrix_single_year.json", "year_matrix_cumulative.csv",
                        "year_matrix_cumulative.json"}) {
    CHECK(fs::exists(tmp / "pred" / f));
  }
  p.mode = "sideways";
  CHECK(cmd_predict(p, log) == kExitBadConfig);

  write_file(tmp / "one.json", R"({"n_drivers": 2, "months": "2021-02:2021-04"})");
  REQUIRE(cmd_synth(tmp / "one.json", tmp / "one", log) == kExitOk);
  PredictArgs single;
  single.root = tmp / "one" / "bundles";
  single.out = tmp / "pred1";
  CHECK(cmd_predict(single, log) == kExitNoData);
}

TEST_CASE("anon needs a salt and writes pseudonymous bundles") {
  TempDir tmp("cmd");
  std::ostringstream log;
  AnonArgs a;
  a.root = fixture() / "bundles";
  a.out = tmp / "anon";
  ::unsetenv(kSaltEnvVar);
  CHECK(cmd_anon(a, log) == kExitBadSalt);
  CHECK_FALSE(fs::exists(tmp / "anon"));

  write_file(tmp / "key", "0123456789abcdef-key\n");
  a.salt_file = (tmp / "key").string();
  const std::string before = tree_bytes(fixture() / "bundles");
  REQUIRE(cmd_anon(a, log) == kExitOk);
  CHECK(tree_bytes(fixture() / "bundles") == before);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(tmp / "anon")) {
    CHECK(std::regex_match(e.path().filename().string(), std::regex("[0-9a-f]{16}")));
    ++n;
  }
  CHECK(n == 4);
  const auto bytes = tree_bytes(tmp / "anon");
  CHECK(bytes.find(kPiiMarker) == std::string::npos);
  CHECK(bytes.find("driver_0001") == std::string::npos);

  a.out = a.root;
  CHECK(cmd_anon(a, log) == kExitBadConfig);
  a.out = tmp / "anon2";
  a.strip = std::vector<std::string>{"no_such_field"};
  CHECK(cmd_anon(a, log) == kExitBadConfig);
}
