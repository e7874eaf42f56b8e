#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gigaudit/model.hpp"
#include "gigaudit/time.hpp"

namespace gigaudit {

enum class WorkingTime {
  Tribunal,  // standby + en route + on trip
  Platform,  // en route + on trip
};

struct SegmentBuild {
  std::vector<ActivitySegment> segments;  // time-sorted, non-overlapping
  std::vector<TripRecord> orphan_trips;   // no overlap with any session
};

// Completed trips contribute [accept, pickup) en route and [pickup, dropoff)
// on trip; cancelled trips contribute [accept, cancel) en route when both
// exist. Remaining session time is standby. Trips partly outside sessions
// are clipped to them; trips wholly outside any session are kept and
// reported as orphans.
SegmentBuild build_segments(const std::vector<AppSession>& sessions, const std::vector<TripRecord>& trips);

// Half-open UTC interval.
struct Period {
  Timestamp start;
  Timestamp end;

  static Period month(Month m, const TimeZone& zone);
  static Period week(IsoWeek w, const TimeZone& zone);
  static Period days(std::chrono::sys_days first, std::chrono::sys_days end_exclusive, const TimeZone& zone);
};

// Milliseconds per state (indexed by SegmentState) within the period.
std::array<std::int64_t, 3> state_ms(const std::vector<ActivitySegment>& segments, const Period& period);

double hours_worked(const std::vector<ActivitySegment>& segments, const Period& period, WorkingTime definition);

struct Utilisation {
  double standby_hours_per_day = 0.0;
  double en_route_hours_per_day = 0.0;
  double on_trip_hours_per_day = 0.0;
  int active_days = 0;
};

// Per-state totals in the month divided by the number of local calendar days
// that contain any segment.
Utilisation utilisation_daily(const std::vector<ActivitySegment>& segments, Month month, const TimeZone& zone);

}  // namespace gigaudit
