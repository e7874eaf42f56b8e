#include "gigaudit/worktime.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace gigaudit {
namespace {

struct Interval {
  Timestamp start;
  Timestamp end;
};

std::vector<Interval> session_envelopes(const std::vector<AppSession>& sessions) {
  std::vector<Interval> iv;
  for (const auto& s : sessions) {
    if (s.login_ts < s.logout_ts) iv.push_back({s.login_ts, s.logout_ts});
  }
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> merged;
  for (const auto& i : iv) {
    if (!merged.empty() && i.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, i.end);
    } else {
      merged.push_back(i);
    }
  }
  return merged;
}

std::vector<ActivitySegment> busy_pieces(const TripRecord& t) {
  std::vector<ActivitySegment> out;
  auto add = [&](std::optional<Timestamp> a, std::optional<Timestamp> b, SegmentState s) {
    if (a && b && *a < *b) out.push_back({t.driver_id, *a, *b, s});
  };
  if (t.completed()) {
    add(t.accept_ts, t.pickup_ts, SegmentState::EnRoute);
    add(t.pickup_ts, t.dropoff_ts, SegmentState::OnTrip);
  } else {
    add(t.accept_ts, t.cancel_ts, SegmentState::EnRoute);
  }
  return out;
}

// Pieces of seg that fall inside the envelopes.
void clip_into(const ActivitySegment& seg, const std::vector<Interval>& env, std::vector<ActivitySegment>& out) {
  auto it = std::upper_bound(env.begin(), env.end(), seg.start_ts,
                             [](Timestamp v, const Interval& i) { return v < i.end; });
  for (; it != env.end() && it->start < seg.end_ts; ++it) {
    const Timestamp a = std::max(seg.start_ts, it->start);
    const Timestamp b = std::min(seg.end_ts, it->end);
    if (a < b) out.push_back({seg.driver_id, a, b, seg.state});
  }
}

bool overlaps_any(const ActivitySegment& seg, const std::vector<Interval>& env) {
  auto it = std::upper_bound(env.begin(), env.end(), seg.start_ts,
                             [](Timestamp v, const Interval& i) { return v < i.end; });
  return it != env.end() && it->start < seg.end_ts;
}

std::int64_t overlap_ms(const ActivitySegment& s, const Period& p) {
  const Timestamp a = std::max(s.start_ts, p.start);
  const Timestamp b = std::min(s.end_ts, p.end);
  return a < b ? b - a : 0;
}

}  // namespace

SegmentBuild build_segments(const std::vector<AppSession>& sessions, const std::vector<TripRecord>& trips) {
  SegmentBuild result;
  const std::vector<Interval> env = session_envelopes(sessions);
  std::string driver = !sessions.empty() ? sessions.front().driver_id
                                         : (!trips.empty() ? trips.front().driver_id : std::string());

  std::vector<ActivitySegment> busy;
  for (const auto& t : trips) {
    const auto pieces = busy_pieces(t);
    if (pieces.empty()) continue;
    const bool inside = std::any_of(pieces.begin(), pieces.end(),
                                    [&](const ActivitySegment& p) { return overlaps_any(p, env); });
    if (inside) {
      for (const auto& p : pieces) clip_into(p, env, busy);
    } else {
      busy.insert(busy.end(), pieces.begin(), pieces.end());
      result.orphan_trips.push_back(t);
    }
  }
  std::sort(busy.begin(), busy.end(), [](const ActivitySegment& a, const ActivitySegment& b) {
    return std::tie(a.start_ts, a.end_ts, a.state) < std::tie(b.start_ts, b.end_ts, b.state);
  });
  // Overlapping trips in the source are resolved in favour of the earlier one.
  std::vector<ActivitySegment> clean;
  for (auto s : busy) {
    if (!clean.empty() && s.start_ts < clean.back().end_ts) s.start_ts = clean.back().end_ts;
    if (s.start_ts < s.end_ts) clean.push_back(std::move(s));
  }

  std::vector<ActivitySegment>& out = result.segments;
  std::size_t bi = 0;
  for (const auto& e : env) {
    while (bi < clean.size() && clean[bi].end_ts <= e.start) out.push_back(clean[bi++]);
    Timestamp cursor = e.start;
    while (bi < clean.size() && clean[bi].start_ts < e.end) {
      if (cursor < clean[bi].start_ts) out.push_back({driver, cursor, clean[bi].start_ts, SegmentState::Standby});
      cursor = std::max(cursor, clean[bi].end_ts);
      out.push_back(clean[bi++]);
    }
    if (cursor < e.end) out.push_back({driver, cursor, e.end, SegmentState::Standby});
  }
  while (bi < clean.size()) out.push_back(clean[bi++]);
  return result;
}

Period Period::month(Month m, const TimeZone& zone) {
  return days(m.first_day(), m.next().first_day(), zone);
}

Period Period::week(IsoWeek w, const TimeZone& zone) {
  return days(w.monday(), w.monday() + std::chrono::days{7}, zone);
}

Period Period::days(std::chrono::sys_days first, std::chrono::sys_days end_exclusive, const TimeZone& zone) {
  using std::chrono::seconds;
  using std::chrono::sys_seconds;
  return {zone.from_local(sys_seconds{first.time_since_epoch()}),
          zone.from_local(sys_seconds{end_exclusive.time_since_epoch()})};
}

std::array<std::int64_t, 3> state_ms(const std::vector<ActivitySegment>& segments, const Period& period) {
  std::array<std::int64_t, 3> totals{0, 0, 0};
  for (const auto& s : segments) totals[static_cast<std::size_t>(s.state)] += overlap_ms(s, period);
  return totals;
}

double hours_worked(const std::vector<ActivitySegment>& segments, const Period& period, WorkingTime definition) {
  const auto t = state_ms(segments, period);
  std::int64_t ms = t[static_cast<std::size_t>(SegmentState::EnRoute)] + t[static_cast<std::size_t>(SegmentState::OnTrip)];
  if (definition == WorkingTime::Tribunal) ms += t[static_cast<std::size_t>(SegmentState::Standby)];
  return static_cast<double>(ms) / 3'600'000.0;
}

Utilisation utilisation_daily(const std::vector<ActivitySegment>& segments, Month month, const TimeZone& zone) {
  const Period period = Period::month(month, zone);
  std::set<std::pair<std::string, std::int64_t>> active;
  for (const auto& s : segments) {
    if (overlap_ms(s, period) == 0) continue;
    // Walk the local days this segment touches inside the month.
    const Timestamp a = std::max(s.start_ts, period.start);
    const Timestamp b = std::min(s.end_ts, period.end);
    auto day = zone.local(a).day;
    const auto last = zone.local(b + (-1)).day;
    for (; day <= last; day += std::chrono::days{1}) active.emplace(s.driver_id, day.time_since_epoch().count());
  }
  Utilisation u;
  u.active_days = static_cast<int>(active.size());
  if (u.active_days == 0) return u;
  const auto t = state_ms(segments, period);
  const double days = u.active_days;
  u.standby_hours_per_day = static_cast<double>(t[0]) / 3'600'000.0 / days;
  u.en_route_hours_per_day = static_cast<double>(t[1]) / 3'600'000.0 / days;
  u.on_trip_hours_per_day = static_cast<double>(t[2]) / 3'600'000.0 / days;
  return u;
}

}  // namespace gigaudit
