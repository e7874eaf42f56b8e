#include <doctest.h>

#include "gigaudit/ingest.hpp"
#include "gigaudit/synthgen.hpp"
#include "gigaudit/worktime.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::trip;
using testsupport::ts;
using namespace std::chrono;

namespace {

AppSession session(const std::string& a, const std::string& b) { return {"d1", ts(a), ts(b)}; }

Period whole_day() { return {ts("2021-06-01T00:00:00Z"), ts("2021-06-02T00:00:00Z")}; }

}  // namespace

TEST_CASE("segments for one trip inside a session") {
  const auto b = build_segments({session("2021-06-01T10:00:00Z", "2021-06-01T12:00:00Z")},
                                {trip("2021-06-01T10:30:00Z", "2021-06-01T10:40:00Z", "2021-06-01T11:10:00Z")});
  REQUIRE(b.segments.size() == 4);
  CHECK(b.orphan_trips.empty());
  const std::vector<std::tuple<const char*, const char*, SegmentState>> want = {
      {"2021-06-01T10:00:00Z", "2021-06-01T10:30:00Z", SegmentState::Standby},
      {"2021-06-01T10:30:00Z", "2021-06-01T10:40:00Z", SegmentState::EnRoute},
      {"2021-06-01T10:40:00Z", "2021-06-01T11:10:00Z", SegmentState::OnTrip},
      {"2021-06-01T11:10:00Z", "2021-06-01T12:00:00Z", SegmentState::Standby},
  };
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(b.segments[i].start_ts == ts(std::get<0>(want[i])));
    CHECK(b.segments[i].end_ts == ts(std::get<1>(want[i])));
    CHECK(b.segments[i].state == std::get<2>(want[i]));
  }
  CHECK(hours_worked(b.segments, whole_day(), WorkingTime::Tribunal) == doctest::Approx(2.0));
  CHECK(hours_worked(b.segments, whole_day(), WorkingTime::Platform) == doctest::Approx(40.0 / 60.0));
}

TEST_CASE("empty session and empty segments") {
  const auto b = build_segments({session("2021-06-01T10:00:00Z", "2021-06-01T12:00:00Z")}, {});
  REQUIRE(b.segments.size() == 1);
  CHECK(b.segments[0].state == SegmentState::Standby);
  CHECK(b.segments[0].duration_ms() == 2 * 3600 * 1000);
  CHECK(hours_worked({}, whole_day(), WorkingTime::Tribunal) == 0.0);
  CHECK(hours_worked({}, whole_day(), WorkingTime::Platform) == 0.0);
}

TEST_CASE("clipping, orphans and cancelled trips") {
  TripRecord cancelled = trip("2021-06-01T11:00:00Z", "2021-06-01T11:00:00Z", "2021-06-01T11:00:00Z");
  cancelled.status = TripStatus::RiderCancelled;
  cancelled.pickup_ts.reset();
  cancelled.dropoff_ts.reset();
  cancelled.cancel_ts = ts("2021-06-01T11:05:00Z");
  const auto b = build_segments(
      {session("2021-06-01T10:00:00Z", "2021-06-01T12:00:00Z")},
      {trip("2021-06-01T09:50:00Z", "2021-06-01T09:55:00Z", "2021-06-01T10:20:00Z"), cancelled,
       trip("2021-06-01T14:00:00Z", "2021-06-01T14:05:00Z", "2021-06-01T14:30:00Z")});
  CHECK(b.orphan_trips.size() == 1);
  const Period session{ts("2021-06-01T10:00:00Z"), ts("2021-06-01T12:00:00Z")};
  const auto ms = state_ms(b.segments, session);
  CHECK(ms[static_cast<int>(SegmentState::OnTrip)] == 20 * 60 * 1000);
  CHECK(ms[static_cast<int>(SegmentState::EnRoute)] == 5 * 60 * 1000);
  CHECK(ms[0] + ms[1] + ms[2] == 2 * 3600 * 1000);
  // the orphan keeps its own en route and on trip time
  const auto day = state_ms(b.segments, whole_day());
  CHECK(day[static_cast<int>(SegmentState::OnTrip)] == 45 * 60 * 1000);
  CHECK(day[static_cast<int>(SegmentState::Standby)] == ms[0]);
  for (std::size_t i = 1; i < b.segments.size(); ++i) CHECK(b.segments[i - 1].end_ts <= b.segments[i].start_ts);
}

TEST_CASE("utilisation divides by active days") {
  std::vector<ActivitySegment> segs;
  for (int d = 1; d <= 10; ++d) {
    const auto start = Timestamp{duration_cast<milliseconds>((sys_days{2021y / 6 / d} + 9h).time_since_epoch()).count()};
    segs.push_back({"d1", start, start + 90 * 60 * 1000, SegmentState::Standby});
  }
  const auto u = utilisation_daily(segs, Month{2021, 6}, TimeZone::london());
  CHECK(u.active_days == 10);
  CHECK(u.standby_hours_per_day == doctest::Approx(1.5));
  CHECK(u.on_trip_hours_per_day == 0.0);
  const auto none = utilisation_daily(segs, Month{2021, 7}, TimeZone::london());
  CHECK(none.active_days == 0);
  CHECK(none.standby_hours_per_day == 0.0);
}

TEST_CASE("synthetic driver-months match the generated schedule") {
  GenConfig cfg;
  cfg.n_drivers = 3;
  cfg.months = MonthRange::parse("2021-02:2021-04");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  const auto zone = TimeZone::london();
  for (const auto& g : gen) {
    const auto* d = truth.driver(g.bundle.driver_id);
    const auto b = build_segments(g.bundle.sessions, g.bundle.trips);
    CHECK(b.orphan_trips.empty());
    for (const auto& [month, want] : d->months) {
      const auto got = state_ms(b.segments, Period::month(month, zone));
      CHECK(std::abs(got[0] - want.standby_ms) <= 1000);
      CHECK(std::abs(got[1] - want.en_route_ms) <= 1000);
      CHECK(std::abs(got[2] - want.on_trip_ms) <= 1000);
      const double tribunal = hours_worked(b.segments, Period::month(month, zone), WorkingTime::Tribunal);
      CHECK(std::abs(tribunal * 3.6e6 - static_cast<double>(want.standby_ms + want.en_route_ms + want.on_trip_ms)) <= 1000);
    }
  }
}

TEST_CASE("standby per day rises once standby inflation applies") {
  GenConfig cfg;
  cfg.n_drivers = 6;
  cfg.months = MonthRange::parse("2022-11:2023-05");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  const auto zone = TimeZone::london();
  double pre = 0, post = 0;
  int pre_days = 0, post_days = 0;
  for (const auto& g : gen) {
    const auto b = build_segments(g.bundle.sessions, g.bundle.trips);
    for (Month m : {Month{2022, 11}, Month{2022, 12}, Month{2023, 1}}) {
      const auto u = utilisation_daily(b.segments, m, zone);
      pre += u.standby_hours_per_day * u.active_days;
      pre_days += u.active_days;
    }
    for (Month m : {Month{2023, 3}, Month{2023, 4}, Month{2023, 5}}) {
      const auto u = utilisation_daily(b.segments, m, zone);
      post += u.standby_hours_per_day * u.active_days;
      post_days += u.active_days;
    }
  }
  REQUIRE(pre_days > 0);
  REQUIRE(post_days > 0);
  CHECK(post / post_days > pre / pre_days);
}
