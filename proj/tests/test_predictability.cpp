#include <doctest.h>

#include "gigaudit/error.hpp"
#include "gigaudit/linkage.hpp"
#include "gigaudit/predictability.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::ts;

namespace {

LinkedTrip tuesday_trip() {
  LinkedTrip lt;
  lt.trip.driver_id = "d";
  // 2023-01-10 is a Tuesday; London is on GMT in January
  lt.trip.request_ts = ts("2023-01-10T07:55:00Z");
  lt.trip.accept_ts = ts("2023-01-10T07:55:00Z");
  lt.trip.pickup_ts = ts("2023-01-10T08:00:00Z");
  lt.trip.dropoff_ts = ts("2023-01-10T08:30:00Z");
  lt.trip.distance_miles = 10.0;
  lt.trip.product = "UberX";
  lt.driver_total = Money::pence(1875);
  return lt;
}

std::vector<LinkedTrip> linked_fixture(PayModel model, const char* months, int drivers) {
  GenConfig cfg;
  cfg.n_drivers = drivers;
  cfg.months = MonthRange::parse(months);
  cfg.pay_model = model;
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  std::vector<LinkedTrip> out;
  for (const auto& g : gen) {
    auto r = link(g.bundle.trips, g.bundle.payments);
    out.insert(out.end(), r.linked.begin(), r.linked.end());
  }
  return out;
}

}  // namespace

TEST_CASE("standard schema has 64 uniquely named features") {
  const auto s = FeatureSchema::standard();
  CHECK(s.dimension() == 64);
  CHECK(s.index_of("hour_00") == 3);
  CHECK(s.index_of("dow_mon") == 27);
  CHECK_THROWS_AS(FeatureSchema({"UberX", "UberX"}), AuditError);
}

TEST_CASE("featurize encodes the worked example") {
  const auto s = FeatureSchema::standard();
  const auto f = featurize(tuesday_trip(), s, TimeZone::london());
  REQUIRE(f.values.size() == 64);
  CHECK(f.values[s.index_of("on_trip_min")] == 30.0);
  CHECK(f.values[s.index_of("en_route_min")] == 5.0);
  CHECK(f.values[s.index_of("distance_miles")] == 10.0);
  CHECK(f.values[s.index_of("dow_mon") + 1] == 1.0);
  CHECK(f.values[s.index_of("hour_00") + 8] == 1.0);
  CHECK(f.values[s.index_of("month_01")] == 1.0);
  CHECK(f.values[s.index_of("airport_origin")] == 0.0);
  CHECK(f.values[s.index_of("product_UberX")] == 1.0);
  CHECK(f.values[s.index_of("peak_x_distance")] == 10.0);
  CHECK(f.values[s.index_of("night_x_distance")] == 0.0);
  double hot = 0;
  for (int h = 0; h < 24; ++h) hot += f.values[s.index_of("hour_00") + static_cast<std::size_t>(h)];
  CHECK(hot == 1.0);
  CHECK(f.target == doctest::Approx(18.75));
  CHECK(f.year == 2023);

  auto airport = tuesday_trip();
  airport.trip.origin_tag = "Heathrow Airport T5";
  const auto a = featurize(airport, s, TimeZone::london());
  CHECK(a.values[s.index_of("airport_origin")] == 1.0);
  CHECK(a.values[s.index_of("airport_origin_x_distance")] == 10.0);

  auto cancelled = tuesday_trip();
  cancelled.trip.status = TripStatus::RiderCancelled;
  CHECK_THROWS_AS(featurize(cancelled, s, TimeZone::london()), AuditError);
}

TEST_CASE("year matrix needs two years") {
  const auto one = linked_fixture(PayModel::Stationary, "2021-01:2021-03", 2);
  CHECK_THROWS_AS(year_matrix(one, MatrixMode::SingleYear), AuditError);
}

TEST_CASE("year matrix layout, thresholds and parallel determinism") {
  const auto trips = linked_fixture(PayModel::Stationary, "2020-07:2022-06", 4);
  YearMatrixOptions o;
  const auto m = year_matrix(trips, MatrixMode::SingleYear, o);
  CHECK(m.years == std::vector<int>{2020, 2021, 2022});
  CHECK(m.max_lag == 2);
  CHECK(m.cells.size() == 6);
  for (const auto& [key, c] : m.cells) {
    CAPTURE(key.first);
    CAPTURE(key.second);
    REQUIRE(c.r2.has_value());
    CHECK(*c.r2 >= 0.9);
    CHECK(c.note.empty());
  }
  const auto* diag = m.cell(2021, 0);
  REQUIRE(diag != nullptr);
  CHECK(diag->test_rows > 0);
  CHECK(diag->train_rows > diag->test_rows);

  o.jobs = 3;
  const auto p = year_matrix(trips, MatrixMode::SingleYear, o);
  CHECK(p.to_csv() == m.to_csv());
  CHECK(p.to_json() == m.to_json());

  const auto cum = year_matrix(trips, MatrixMode::Cumulative, o);
  CHECK(cum.cell(2022, 1)->train_rows > m.cell(2022, 1)->train_rows);

  const auto head = m.to_csv().substr(0, m.to_csv().find('\n'));
  CHECK(head == "test_year,Y,Y-1,Y-2");

  YearMatrixOptions strict;
  strict.min_train_rows = 1'000'000;
  const auto empty = year_matrix(trips, MatrixMode::SingleYear, strict);
  for (const auto& [_, c] : empty.cells) {
    CHECK_FALSE(c.r2.has_value());
    CHECK_FALSE(c.note.empty());
  }
  CHECK(empty.to_json()["cells"][0]["r2"].is_null());
}
