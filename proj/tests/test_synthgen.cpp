#include <doctest.h>

#include <cmath>

#include "gigaudit/error.hpp"
#include "gigaudit/ingest.hpp"
#include "gigaudit/linkage.hpp"
#include "gigaudit/metrics.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::TempDir;
using testsupport::tree_bytes;

TEST_CASE("apportion uses largest remainders") {
  const auto a = apportion({{"M", 0.8}, {"F", 0.15}, {"other", 0.05}}, 7);
  int total = 0;
  for (const auto& [_, n] : a) total += n;
  CHECK(total == 7);
  CHECK(a.at("M") == 6);  // 5.6 -> 5, then largest remainder .6
  CHECK(a.at("F") == 1);
  CHECK(a.at("other") == 0);
}

TEST_CASE("same seed gives byte-identical output") {
  TempDir a("gen"), b("gen"), c("gen");
  GenConfig cfg;
  cfg.n_drivers = 3;
  cfg.months = MonthRange::parse("2021-05:2021-06");
  cfg.corruptions = {1, 1, 1};
  generate(cfg, a.path());
  cfg.jobs = 3;
  generate(cfg, b.path());
  CHECK(tree_bytes(a.path()) != "");
  // ground truth echoes the config, which differs only in jobs
  std::filesystem::remove(a / "ground_truth.json");
  std::filesystem::remove(b / "ground_truth.json");
  CHECK(tree_bytes(a.path()) == tree_bytes(b.path()));
  cfg.seed = 43;
  generate(cfg, c.path());
  std::filesystem::remove(c / "ground_truth.json");
  CHECK(tree_bytes(a.path()) != tree_bytes(c.path()));
}

TEST_CASE("fixed-commission era pays exactly three quarters") {
  GenConfig cfg;
  cfg.n_drivers = 3;
  cfg.months = MonthRange::parse("2021-01:2021-03");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  std::size_t n = 0;
  for (const auto& g : gen) {
    for (const auto& lt : link(g.bundle.trips, g.bundle.payments).linked) {
      REQUIRE(lt.driver_share.has_value());
      CHECK(lt.driver_total.minor_units() * 4 == lt.rider_fare->minor_units() * 3);
      ++n;
    }
  }
  CHECK(n > 100);
}

TEST_CASE("dynamic-era share mean is recovered") {
  GenConfig cfg;
  cfg.n_drivers = 8;
  cfg.months = MonthRange::parse("2023-03:2023-08");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  std::vector<LinkedTrip> all;
  for (const auto& g : gen) {
    auto r = link(g.bundle.trips, g.bundle.payments);
    all.insert(all.end(), r.linked.begin(), r.linked.end());
  }
  const auto s = take_rate_stats(all, GroupBy::Trip);
  CHECK(s.units == truth.dynamic_share.trips);
  CHECK(std::abs(s.mean - truth.dynamic_share.expected_mean) < 0.005);
  double p = 0;
  for (double b : truth.dynamic_share.bin_probabilities) p += b;
  CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("opaque era exports pay as the fare") {
  GenConfig cfg;
  cfg.n_drivers = 1;
  cfg.months = MonthRange::parse("2022-04:2022-04");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  const auto r = link(gen[0].bundle.trips, gen[0].bundle.payments);
  for (const auto& lt : r.linked) CHECK_FALSE(lt.has_share());
}

TEST_CASE("cohort assignment follows the plan") {
  GenConfig cfg;
  cfg.n_drivers = 11;
  cfg.months = MonthRange::parse("2022-12:2023-05");
  CohortPlan plan;
  plan.pre = MonthRange::parse("2022-12:2023-01");
  plan.post = MonthRange::parse("2023-04:2023-05");
  plan.missing_month_drivers = 1;
  cfg.cohort = plan;
  GroundTruth truth;
  (void)generate_bundles(cfg, truth);
  int cut = 0, raise = 0, missing = 0;
  for (const auto& d : truth.drivers) {
    if (d.cohort_assignment == "cut") ++cut;
    if (d.cohort_assignment == "raise") ++raise;
    if (d.cohort_assignment == "missing_month") {
      ++missing;
      REQUIRE(d.missing_month.has_value());
      CHECK(plan.post.contains(*d.missing_month));
      CHECK(d.months.count(*d.missing_month) == 0);
    }
  }
  CHECK(missing == 1);
  CHECK(cut == 8);
  CHECK(raise == 2);
}

TEST_CASE("config parsing and validation") {
  const auto cfg = GenConfig::from_json(nlohmann::json::parse(
      R"({"seed": 5, "n_drivers": 2, "months": "2021-01:2021-02", "era_boundaries": "2022-02,2023-02",
          "pay_model": "regime_switch", "corruptions": {"duplicate_rows": 1}})"));
  CHECK(cfg.seed == 5);
  CHECK(cfg.n_drivers == 2);
  CHECK(cfg.pay_model == PayModel::RegimeSwitch);
  CHECK(cfg.corruptions.duplicate_rows == 1);
  CHECK(GenConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());

  auto code = [](const char* text) {
    try {
      GenConfig::from_json(nlohmann::json::parse(text)).validate();
    } catch (const AuditError& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code(R"({"bogus": 1})") == ErrorCode::InvalidConfig);
  CHECK(code(R"({"n_drivers": 0})") == ErrorCode::InvalidConfig);
  CHECK(code(R"({"commission_rate": 1.5})") == ErrorCode::InvalidConfig);
  CHECK(code(R"({"jitter_seconds": -1})") == ErrorCode::InvalidConfig);
  CHECK(code(R"({"acceptance_rate": [0.9, 0.5]})") == ErrorCode::InvalidConfig);
  CHECK(code(R"({"pay_model": "quadratic"})") == ErrorCode::InvalidConfig);
}

TEST_CASE("ground truth json carries the oracle sections") {
  GenConfig cfg;
  cfg.n_drivers = 2;
  cfg.months = MonthRange::parse("2021-01:2021-01");
  GroundTruth truth;
  (void)generate_bundles(cfg, truth);
  const auto j = truth.to_json();
  for (const char* k : {"config", "drivers", "corruptions", "dynamic_share", "pii_marker", "demographics"}) {
    CAPTURE(k);
    CHECK(j.contains(k));
  }
  CHECK(j["drivers"].size() == 2);
}
