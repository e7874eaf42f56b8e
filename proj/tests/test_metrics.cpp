#include <doctest.h>

#include <cmath>

#include "gigaudit/error.hpp"
#include "gigaudit/metrics.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::payment;
using testsupport::trip;
using testsupport::ts;

namespace {

LinkedTrip shared(double share, const std::string& driver = "d1", std::int64_t fare = 1000, int minutes = 10,
                  const std::string& pickup = "2023-06-01T10:00:00Z") {
  LinkedTrip lt;
  lt.trip.driver_id = driver;
  lt.trip.request_ts = ts(pickup);
  lt.trip.accept_ts = ts(pickup);
  lt.trip.pickup_ts = ts(pickup);
  lt.trip.dropoff_ts = ts(pickup) + std::int64_t{minutes} * 60'000;
  lt.rider_fare = Money::pence(fare);
  lt.driver_total = Money::pence(std::llround(share * static_cast<double>(fare)));
  lt.driver_share = share;
  lt.platform_share = 1.0 - share;
  return lt;
}

WeeklyPayRow row(const std::string& driver, IsoWeek w, std::int64_t pence, double tribunal, double platform) {
  return {driver, w, Money::pence(pence), tribunal, platform};
}

}  // namespace

TEST_CASE("weekly pay is a signed sum over the local week") {
  const auto z = TimeZone::london();
  const std::vector<PaymentEvent> p = {
      payment("2023-06-05T10:00:00Z", 50000),
      payment("2023-06-06T10:00:00Z", 1500, PaymentCategory::ThirdPartyFee),
      payment("2023-06-07T10:00:00Z", -500, PaymentCategory::Adjustment),
      payment("2023-06-04T23:30:00Z", 99999),  // Monday 00:30 local, same week
      payment("2023-06-11T23:30:00Z", 77777),  // Monday local, next week
  };
  CHECK(weekly_pay(p, IsoWeek{2023, 23}, z).minor_units() == 51000 + 99999);
  CHECK(weekly_pay({p.begin(), p.begin() + 3}, IsoWeek{2023, 23}, z).minor_units() == 51000);
  CHECK(weekly_pay(p, IsoWeek{2023, 30}, z).minor_units() == 0);
}

TEST_CASE("pay per hour uses pooled ratios") {
  const std::vector<WeeklyPayRow> one = {row("d", {2023, 23}, 51000, 30, 20)};
  CHECK(pay_per_hour(one, WorkingTime::Tribunal) == doctest::Approx(17.0));
  CHECK(pay_per_hour(one, WorkingTime::Platform) == doctest::Approx(25.5));
  const std::vector<WeeklyPayRow> two = {row("d", {2023, 23}, 10000, 10, 5), row("d", {2023, 24}, 30000, 10, 5)};
  CHECK(pay_per_hour(two, WorkingTime::Tribunal) == doctest::Approx(20.0));
  CHECK(pay_per_hour(two, WeekRange{{2023, 24}, {2023, 24}}, WorkingTime::Tribunal) == doctest::Approx(30.0));
  try {
    (void)pay_per_hour(std::vector<WeeklyPayRow>{row("d", {2023, 23}, 100, 0, 0)}, WorkingTime::Platform);
    FAIL("no throw");
  } catch (const AuditError& e) {
    CHECK(e.code() == ErrorCode::ZeroHours);
  }
}

TEST_CASE("inflation adjustment") {
  std::map<Month, double> series;
  std::map<Month, double> zero, ten;
  for (int k = 0; k <= 12; ++k) {
    const Month m = Month::from_ordinal(Month{2022, 1}.ordinal() + k);
    series[m] = 100.0 + k;
    zero[m] = 0.0;
    ten[m] = 10.0;
  }
  const auto same = adjust_inflation(series, RpiSeries(zero), Month{2023, 1});
  for (const auto& [m, v] : series) CHECK(same.at(m) == v);

  const std::map<Month, double> start = {{Month{2022, 1}, 100.0}};
  const auto adj = adjust_inflation(start, RpiSeries(ten), Month{2023, 1});
  CHECK(std::abs(adj.at(Month{2022, 1}) - 110.0) < 1e-9);

  // later months deflate back to the base
  const std::map<Month, double> late = {{Month{2023, 1}, 110.0}};
  CHECK(std::abs(adjust_inflation(late, RpiSeries(ten), Month{2022, 1}).at(Month{2023, 1}) - 100.0) < 1e-9);
  CHECK_THROWS_AS(adjust_inflation({{Month{2019, 1}, 1.0}}, RpiSeries(ten), Month{2023, 1}), AuditError);
}

TEST_CASE("share histogram bins") {
  const std::vector<LinkedTrip> three = {shared(0.55), shared(0.65), shared(0.65)};
  const auto h = take_rate_histogram(three);
  REQUIRE(h.counts.size() == 8);
  CHECK(h.total == 3);
  CHECK(h.counts[1] == 1);
  CHECK(h.label(1) == "50-60");
  CHECK(h.counts[2] == 2);
  CHECK(h.label(2) == "60-70");
  const auto& e = default_share_edges_pct();
  CHECK(h.label(share_bin(1.05, e)) == "100-110");
  CHECK(share_bin(0.75, e) == 3);
  CHECK(share_bin(0.70, e) == 3);
  CHECK(share_bin(-0.2, e) == 0);
  CHECK(share_bin(2.0, e) == 7);
}

TEST_CASE("take rate statistics by trip and by driver") {
  const std::vector<LinkedTrip> trips = {shared(0.5), shared(0.75), shared(1.0)};
  const auto s = take_rate_stats(trips, GroupBy::Trip);
  CHECK(s.mean == doctest::Approx(0.75));
  CHECK(s.median == doctest::Approx(0.75));
  CHECK(s.units == 3);

  const std::vector<LinkedTrip> drivers = {shared(0.65, "a"), shared(0.75, "a"), shared(0.80, "b")};
  const auto d = take_rate_stats(drivers, GroupBy::Driver);
  CHECK(d.units == 2);
  CHECK(d.share_at_or_above == doctest::Approx(0.5));
  CHECK_THROWS_AS(take_rate_stats(std::vector<LinkedTrip>{}, GroupBy::Trip), AuditError);
}

TEST_CASE("surplus per on-trip hour") {
  std::vector<LinkedTrip> linked = {shared(0.8, "d1", 100000, 60)};
  std::vector<ActivitySegment> segs = {{"d1", ts("2023-06-02T00:00:00Z"), ts("2023-06-03T01:00:00Z"), SegmentState::OnTrip},
                                       {"d2", ts("2023-06-02T00:00:00Z"), ts("2023-06-02T05:00:00Z"), SegmentState::OnTrip}};
  const auto pts = surplus_per_on_trip_hour(linked, segs, MonthRange::parse("2023-06:2023-06"), TimeZone::london());
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].fare_minus_pay.minor_units() == 20000);
  CHECK(pts[0].on_trip_hours == doctest::Approx(25.0));
  CHECK(*pts[0].pounds_per_hour == doctest::Approx(8.0));
  CHECK(pts[0].status == SurplusStatus::Direct);
}

TEST_CASE("gap filling interpolates interior gaps only") {
  std::vector<std::optional<double>> v = {8.0, std::nullopt, 12.0};
  auto st = fill_gaps(v);
  CHECK(*v[1] == doctest::Approx(10.0));
  CHECK(st[1] == SurplusStatus::Interpolated);
  CHECK(st[0] == SurplusStatus::Direct);

  std::vector<std::optional<double>> edges = {std::nullopt, 8.0, std::nullopt, std::nullopt, 14.0, std::nullopt};
  st = fill_gaps(edges);
  CHECK_FALSE(edges[0].has_value());
  CHECK_FALSE(edges[5].has_value());
  CHECK(st[0] == SurplusStatus::UnbracketedGap);
  CHECK(st[5] == SurplusStatus::UnbracketedGap);
  CHECK(*edges[2] == doctest::Approx(10.0));
  CHECK(*edges[3] == doctest::Approx(12.0));
}

TEST_CASE("per-minute split") {
  const std::vector<LinkedTrip> one = {shared(1.10, "d1", 1000, 10)};
  const auto r = per_minute_fare_by_split(one);
  const auto& b = r.bins[share_bin(1.10, default_share_edges_pct())];
  CHECK(b.trips == 1);
  CHECK(b.driver_per_min == doctest::Approx(1.10));
  CHECK(b.platform_per_min == doctest::Approx(-0.10));

  const std::vector<LinkedTrip> mix = {shared(0.75, "a", 1200, 7), shared(0.72, "b", 2000, 13), shared(0.78, "c", 900, 11)};
  const auto m = per_minute_fare_by_split(mix);
  for (const auto& bin : m.bins) CHECK(bin.driver_pence + bin.platform_pence == bin.fare_pence);
  const auto& mb = m.bins[3];
  CHECK(mb.trips == 3);
  CHECK(mb.driver_per_min + mb.platform_per_min == doctest::Approx(mb.fare_per_min).epsilon(1e-12));

  LinkedTrip no_share = shared(0.5);
  no_share.driver_share.reset();
  CHECK(per_minute_fare_by_split(std::vector<LinkedTrip>{no_share}).skipped_trips == 1);
}

TEST_CASE("cohort pay change") {
  const MonthRange pre = MonthRange::parse("2021-01:2021-01");
  const MonthRange post = MonthRange::parse("2021-03:2021-03");
  std::vector<TripRecord> trips;
  for (const char* d : {"cut", "flat", "gap"}) {
    auto a = trip("2021-01-12T10:00:00Z", "2021-01-12T10:05:00Z", "2021-01-12T10:30:00Z");
    a.driver_id = d;
    trips.push_back(a);
    if (std::string(d) != "gap") {
      auto b = trip("2021-03-10T10:00:00Z", "2021-03-10T10:05:00Z", "2021-03-10T10:30:00Z");
      b.driver_id = d;
      trips.push_back(b);
    }
  }
  const std::vector<WeeklyPayRow> rows = {
      row("cut", {2021, 2}, 20000, 10, 6), row("cut", {2021, 10}, 18000, 10, 6),
      row("flat", {2021, 2}, 20000, 10, 6), row("flat", {2021, 10}, 20000, 10, 6),
      row("gap", {2021, 2}, 20000, 10, 6),
  };
  const auto split = cohort_pay_change(rows, trips, pre, post, TimeZone::london());
  REQUIRE(split.qualified.size() == 2);
  CHECK(split.qualified[0].driver_id == "cut");
  CHECK(split.qualified[0].pct_change == doctest::Approx(-10.0));
  CHECK(split.qualified[0].group == CohortGroup::PaidLess);
  CHECK(split.qualified[1].pct_change == 0.0);
  CHECK(split.qualified[1].group == CohortGroup::PaidSameOrMore);
  CHECK(split.excluded.count("gap") == 1);
  CHECK(split.members(CohortGroup::PaidLess) == std::vector<std::string>{"cut"});
  CHECK_THROWS_AS(cohort_pay_change(rows, trips, pre, MonthRange::parse("2021-03:2021-04"), TimeZone::london()),
                  AuditError);
}

TEST_CASE("acceptance rate") {
  std::vector<DispatchOffer> offers;
  for (int i = 0; i < 10; ++i) offers.push_back({"d", ts("2021-06-01T10:00:00Z") + i * 1000, i < 8});
  const Period p{ts("2021-06-01T00:00:00Z"), ts("2021-06-02T00:00:00Z")};
  CHECK(acceptance_rate(offers, p) == doctest::Approx(0.8));
  for (auto& o : offers) o.accepted = true;
  CHECK(acceptance_rate(offers, p) == 1.0);
  CHECK_THROWS_AS(acceptance_rate(offers, Period{ts("2022-01-01T00:00:00Z"), ts("2022-01-02T00:00:00Z")}), AuditError);
}

TEST_CASE("kernel density comparison") {
  const std::vector<double> a = {0.55, 0.6, 0.62, 0.7, 0.71, 0.75, 0.8, 0.9, 1.05};
  const auto same = distribution_compare(a, a);
  CHECK(same.density_a == same.density_b);

  const std::vector<double> point(50, 0.75);
  const auto pk = distribution_compare(point, a);
  const auto peak = std::max_element(pk.density_a.begin(), pk.density_a.end()) - pk.density_a.begin();
  CHECK(pk.grid[static_cast<std::size_t>(peak)] == doctest::Approx(0.75).epsilon(0.01));

  // densities integrate to one (trapezoid rule)
  for (const auto* d : {&pk.density_a, &pk.density_b}) {
    double area = 0;
    for (std::size_t i = 1; i < pk.grid.size(); ++i) area += 0.5 * ((*d)[i] + (*d)[i - 1]) * (pk.grid[i] - pk.grid[i - 1]);
    CHECK(area == doctest::Approx(1.0).epsilon(0.01));
  }
  // Silverman on a hand-checked sample: sd = 1.5811, IQR/1.34 = 1.4925
  const std::vector<double> five = {1, 2, 3, 4, 5};
  CHECK(silverman_bandwidth(five) == doctest::Approx(0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2)));
}

TEST_CASE("demographic proportions") {
  std::vector<DriverProfile> ps(100);
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].gender = i < 96 ? Gender::Male : Gender::Female;
  const auto s = cohort_summary(ps);
  CHECK(s.gender.at("M") == doctest::Approx(0.96));
  CHECK(s.gender.at("F") == doctest::Approx(0.04));
  CHECK(s.age_band.empty());
  CHECK(s.age_band_missing == 100);

  std::vector<DriverProfile> unknown(7);
  const auto u = cohort_summary(unknown);
  CHECK(u.gender.empty());
  CHECK(u.gender_missing == 7);
}

TEST_CASE("synthetic weeks, acceptance and demographics match the generator") {
  GenConfig cfg;
  cfg.n_drivers = 20;
  cfg.months = MonthRange::parse("2021-01:2021-06");
  cfg.acceptance_rate = {0.65, 0.65};
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  const auto z = TimeZone::london();

  std::vector<DriverProfile> profiles;
  for (const auto& g : gen) {
    const auto* d = truth.driver(g.bundle.driver_id);
    for (const auto& [w, want] : d->weeks) {
      CHECK(weekly_pay(g.bundle.payments, w, z).minor_units() == want.pay_pence);
    }
    profiles.insert(profiles.end(), g.bundle.profiles.begin(), g.bundle.profiles.end());
  }
  // per-driver bound at 1000+ offers
  const auto& first = gen.front().bundle;
  REQUIRE(first.dispatches.size() >= 1000);
  const Period all{ts("2020-01-01T00:00:00Z"), ts("2030-01-01T00:00:00Z")};
  CHECK(std::abs(acceptance_rate(first.dispatches, all) - 0.65) <= 0.03);

  const auto s = cohort_summary(profiles);
  for (const auto& [k, n] : truth.gender_counts) {
    CHECK(s.gender.at(k) == doctest::Approx(static_cast<double>(n) / cfg.n_drivers));
  }
  CHECK(truth.gender_counts.at("M") == 16);
  CHECK(truth.gender_counts.at("F") == 3);
  CHECK(truth.gender_counts.at("other") == 1);
}
