#include "gigaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

constexpr double kMsPerHour = 3'600'000.0;

// Order-independent sum: sort first so permuted inputs give identical bits.
double stable_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

Month trip_month(const TripRecord& t, const TimeZone& zone) { return zone.local(t.request_ts).as_month(); }

// Segments are sorted and non-overlapping, so ends are sorted too.
std::array<std::int64_t, 3> state_ms_sorted(std::span<const ActivitySegment> segs, const Period& p) {
  std::array<std::int64_t, 3> totals{0, 0, 0};
  auto it = std::upper_bound(segs.begin(), segs.end(), p.start,
                             [](Timestamp v, const ActivitySegment& s) { return v < s.end_ts; });
  for (; it != segs.end() && it->start_ts < p.end; ++it) {
    const Timestamp a = std::max(it->start_ts, p.start);
    const Timestamp b = std::min(it->end_ts, p.end);
    if (a < b) totals[static_cast<std::size_t>(it->state)] += b - a;
  }
  return totals;
}

}  // namespace

double mean_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  return stable_sum(std::move(values)) / n;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

Money weekly_pay(const std::vector<PaymentEvent>& payments, IsoWeek week, const TimeZone& zone) {
  Money total;
  bool first = true;
  for (const auto& p : payments) {
    if (IsoWeek::of(zone.local(p.ts).day) != week) continue;
    total = first ? p.amount : total + p.amount;
    first = false;
  }
  return total;
}

std::vector<WeeklyPayRow> weekly_rows(const std::string& driver_id, const std::vector<PaymentEvent>& payments,
                                      const std::vector<ActivitySegment>& segments, const TimeZone& zone) {
  std::map<IsoWeek, Money> pay;
  for (const auto& p : payments) {
    const IsoWeek w = IsoWeek::of(zone.local(p.ts).day);
    auto [it, inserted] = pay.try_emplace(w, p.amount);
    if (!inserted) it->second += p.amount;
  }
  std::set<IsoWeek> weeks;
  for (const auto& [w, _] : pay) weeks.insert(w);
  for (const auto& s : segments) {
    IsoWeek w = IsoWeek::of(zone.local(s.start_ts).day);
    const IsoWeek last = IsoWeek::of(zone.local(s.end_ts + (-1)).day);
    weeks.insert(w);
    while (w < last) {
      w = IsoWeek::of(w.monday() + std::chrono::days{7});
      weeks.insert(w);
    }
  }
  std::vector<ActivitySegment> sorted = segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const ActivitySegment& a, const ActivitySegment& b) { return a.start_ts < b.start_ts; });

  std::vector<WeeklyPayRow> rows;
  for (const IsoWeek& w : weeks) {
    WeeklyPayRow r;
    r.driver_id = driver_id;
    r.week = w;
    if (auto it = pay.find(w); it != pay.end()) r.net_pay = it->second;
    const auto t = state_ms_sorted(sorted, Period::week(w, zone));
    r.hours_platform = static_cast<double>(t[1] + t[2]) / kMsPerHour;
    r.hours_tribunal = static_cast<double>(t[0] + t[1] + t[2]) / kMsPerHour;
    rows.push_back(std::move(r));
  }
  return rows;
}

Month week_month(IsoWeek week) {
  const std::chrono::year_month_day ymd{week.monday() + std::chrono::days{3}};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

double pay_per_hour(std::span<const WeeklyPayRow> rows, WorkingTime definition) {
  std::int64_t pence = 0;
  std::vector<double> hours;
  hours.reserve(rows.size());
  for (const auto& r : rows) {
    pence += r.net_pay.minor_units();
    hours.push_back(definition == WorkingTime::Tribunal ? r.hours_tribunal : r.hours_platform);
  }
  const double h = stable_sum(std::move(hours));
  if (!(h > 0.0)) throw AuditError(ErrorCode::ZeroHours, "no working hours in period");
  return static_cast<double>(pence) / 100.0 / h;
}

double pay_per_hour(std::span<const WeeklyPayRow> rows, const WeekRange& period, WorkingTime definition) {
  std::vector<WeeklyPayRow> in;
  for (const auto& r : rows) {
    if (period.contains(r.week)) in.push_back(r);
  }
  return pay_per_hour(in, definition);
}

std::map<Month, double> adjust_inflation(const std::map<Month, double>& series, const RpiSeries& rpi, Month base) {
  auto factor = [&](Month m) {
    auto yoy = rpi.yoy(m);
    if (!yoy) throw AuditError(ErrorCode::MissingRpiMonth, "no RPI value for " + m.to_string());
    return std::pow(1.0 + *yoy / 100.0, 1.0 / 12.0);
  };
  std::map<Month, double> out;
  for (const auto& [month, value] : series) {
    if (!rpi.yoy(month)) throw AuditError(ErrorCode::MissingRpiMonth, "no RPI value for " + month.to_string());
    double scale = 1.0;
    if (month < base) {
      for (int k = month.ordinal() + 1; k <= base.ordinal(); ++k) scale *= factor(Month::from_ordinal(k));
      out[month] = value * scale;
    } else {
      for (int k = base.ordinal() + 1; k <= month.ordinal(); ++k) scale *= factor(Month::from_ordinal(k));
      out[month] = value / scale;
    }
  }
  return out;
}

const std::vector<int>& default_share_edges_pct() {
  static const std::vector<int> edges = {0, 50, 60, 70, 80, 90, 100, 110, 150};
  return edges;
}

std::string ShareHistogram::label(std::size_t bin) const {
  return std::to_string(edges_pct[bin]) + "-" + std::to_string(edges_pct[bin + 1]);
}

std::size_t share_bin(double share, const std::vector<int>& edges_pct) {
  if (edges_pct.size() < 2) throw AuditError(ErrorCode::InvalidArgument, "need at least two bin edges");
  const std::size_t bins = edges_pct.size() - 1;
  for (std::size_t i = 1; i < bins; ++i) {
    if (share < static_cast<double>(edges_pct[i]) / 100.0) return i - 1;
  }
  return bins - 1;
}

ShareHistogram take_rate_histogram(std::span<const LinkedTrip> linked, const std::vector<int>& edges_pct) {
  if (!std::is_sorted(edges_pct.begin(), edges_pct.end()) ||
      std::adjacent_find(edges_pct.begin(), edges_pct.end()) != edges_pct.end()) {
    throw AuditError(ErrorCode::InvalidArgument, "bin edges must be strictly increasing");
  }
  ShareHistogram h;
  h.edges_pct = edges_pct;
  h.counts.assign(edges_pct.size() - 1, 0);
  for (const auto& lt : linked) {
    if (!lt.driver_share) continue;
    ++h.counts[share_bin(*lt.driver_share, edges_pct)];
    ++h.total;
  }
  return h;
}

TakeRateStats take_rate_stats(std::span<const LinkedTrip> linked, GroupBy group_by, double threshold) {
  std::vector<double> units;
  if (group_by == GroupBy::Trip) {
    for (const auto& lt : linked) {
      if (lt.driver_share) units.push_back(*lt.driver_share);
    }
  } else {
    std::map<std::string, std::vector<double>> per_driver;
    for (const auto& lt : linked) {
      if (lt.driver_share) per_driver[lt.trip.driver_id].push_back(*lt.driver_share);
    }
    for (auto& [_, shares] : per_driver) units.push_back(mean_of(std::move(shares)));
  }
  if (units.empty()) throw AuditError(ErrorCode::InvalidArgument, "no trips with a valid driver share");
  TakeRateStats s;
  s.units = units.size();
  s.share_at_or_above = static_cast<double>(std::count_if(units.begin(), units.end(),
                                                          [&](double v) { return v >= threshold; })) /
                        static_cast<double>(units.size());
  s.median = median_of(units);
  s.mean = mean_of(std::move(units));
  return s;
}

std::string_view to_string(SurplusStatus s) {
  switch (s) {
    case SurplusStatus::Direct: return "direct";
    case SurplusStatus::Interpolated: return "interpolated";
    case SurplusStatus::UnbracketedGap: return "unbracketed_gap";
  }
  return "direct";
}

std::vector<SurplusStatus> fill_gaps(std::vector<std::optional<double>>& values) {
  std::vector<SurplusStatus> status(values.size(), SurplusStatus::Direct);
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) {
      if (prev && i - *prev > 1) {
        const double a = *values[*prev];
        const double b = *values[i];
        const double span = static_cast<double>(i - *prev);
        for (std::size_t k = *prev + 1; k < i; ++k) {
          values[k] = a + (b - a) * static_cast<double>(k - *prev) / span;
          status[k] = SurplusStatus::Interpolated;
        }
      } else if (!prev) {
        for (std::size_t k = 0; k < i; ++k) status[k] = SurplusStatus::UnbracketedGap;
      }
      prev = i;
    }
  }
  const std::size_t tail_start = prev ? *prev + 1 : 0;
  for (std::size_t k = tail_start; k < values.size(); ++k) status[k] = SurplusStatus::UnbracketedGap;
  return status;
}

std::vector<SurplusPoint> surplus_per_on_trip_hour(std::span<const LinkedTrip> linked,
                                                   std::span<const ActivitySegment> segments, MonthRange months,
                                                   const TimeZone& zone) {
  const int n = months.size();
  std::vector<SurplusPoint> points(static_cast<std::size_t>(n));
  std::vector<std::set<std::string>> drivers(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) points[static_cast<std::size_t>(i)].month = Month::from_ordinal(months.first.ordinal() + i);

  for (const auto& lt : linked) {
    if (!lt.driver_share) continue;
    const Month m = trip_month(lt.trip, zone);
    if (!months.contains(m)) continue;
    const auto idx = static_cast<std::size_t>(m.ordinal() - months.first.ordinal());
    points[idx].fare_minus_pay += *lt.rider_fare - lt.driver_total;
    ++points[idx].trips;
    drivers[idx].insert(lt.trip.driver_id);
  }

  std::map<std::string, std::vector<ActivitySegment>> by_driver;
  for (const auto& s : segments) {
    if (s.state == SegmentState::OnTrip) by_driver[s.driver_id].push_back(s);
  }
  for (auto& [_, v] : by_driver) {
    std::sort(v.begin(), v.end(), [](const ActivitySegment& a, const ActivitySegment& b) { return a.start_ts < b.start_ts; });
  }

  std::vector<std::optional<double>> values(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Period p = Period::month(points[i].month, zone);
    std::int64_t ms = 0;
    for (const auto& d : drivers[i]) {
      auto it = by_driver.find(d);
      if (it != by_driver.end()) ms += state_ms_sorted(it->second, p)[2];
    }
    points[i].on_trip_hours = static_cast<double>(ms) / kMsPerHour;
    if (points[i].trips > 0 && ms > 0) values[i] = points[i].fare_minus_pay.pounds() / points[i].on_trip_hours;
  }
  const auto status = fill_gaps(values);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].pounds_per_hour = values[i];
    points[i].status = status[i];
  }
  return points;
}

SplitRates per_minute_fare_by_split(std::span<const LinkedTrip> linked, const std::vector<int>& edges_pct) {
  SplitRates out;
  for (std::size_t i = 0; i + 1 < edges_pct.size(); ++i) {
    SplitBinRate b;
    b.lo_pct = edges_pct[i];
    b.hi_pct = edges_pct[i + 1];
    out.bins.push_back(b);
  }
  for (const auto& lt : linked) {
    const std::int64_t ms = lt.on_trip_ms();
    if (!lt.driver_share || ms <= 0) {
      ++out.skipped_trips;
      continue;
    }
    SplitBinRate& b = out.bins[share_bin(*lt.driver_share, edges_pct)];
    ++b.trips;
    b.driver_pence += lt.driver_total.minor_units();
    b.fare_pence += lt.rider_fare->minor_units();
    b.platform_pence += lt.rider_fare->minor_units() - lt.driver_total.minor_units();
    b.on_trip_ms += ms;
  }
  for (auto& b : out.bins) {
    if (b.on_trip_ms == 0) continue;
    const double minutes = static_cast<double>(b.on_trip_ms) / 60'000.0;
    b.driver_per_min = static_cast<double>(b.driver_pence) / 100.0 / minutes;
    b.platform_per_min = static_cast<double>(b.platform_pence) / 100.0 / minutes;
    b.fare_per_min = static_cast<double>(b.fare_pence) / 100.0 / minutes;
  }
  return out;
}

std::string_view to_string(CohortGroup g) {
  return g == CohortGroup::PaidLess ? "paid_less" : "paid_same_or_more";
}

std::vector<std::string> CohortSplit::members(CohortGroup g) const {
  std::vector<std::string> out;
  for (const auto& d : qualified) {
    if (d.group == g) out.push_back(d.driver_id);
  }
  return out;
}

CohortSplit cohort_pay_change(std::span<const WeeklyPayRow> rows, std::span<const TripRecord> trips,
                              const MonthRange& window_pre, const MonthRange& window_post, const TimeZone& zone,
                              const CohortOptions& options) {
  if (window_pre.size() != window_post.size()) {
    throw AuditError(ErrorCode::InvalidArgument, "cohort windows must have the same length");
  }
  if (!(window_pre.last < window_post.first || window_post.last < window_pre.first)) {
    throw AuditError(ErrorCode::InvalidArgument, "cohort windows overlap");
  }
  CohortSplit out;
  out.window_pre = window_pre;
  out.window_post = window_post;

  std::map<std::string, std::map<Month, int>> trips_per_month;
  std::set<std::string> drivers;
  for (const auto& t : trips) {
    drivers.insert(t.driver_id);
    if (t.completed()) ++trips_per_month[t.driver_id][trip_month(t, zone)];
  }
  for (const auto& r : rows) drivers.insert(r.driver_id);

  std::map<std::string, std::vector<WeeklyPayRow>> pre_rows, post_rows;
  for (const auto& r : rows) {
    const Month m = week_month(r.week);
    if (window_pre.contains(m)) pre_rows[r.driver_id].push_back(r);
    if (window_post.contains(m)) post_rows[r.driver_id].push_back(r);
  }

  std::vector<double> pre_rates, post_rates;
  for (const auto& d : drivers) {
    const auto& counts = trips_per_month[d];
    std::optional<Month> missing;
    for (const auto& w : {window_pre, window_post}) {
      for (int k = w.first.ordinal(); k <= w.last.ordinal() && !missing; ++k) {
        auto it = counts.find(Month::from_ordinal(k));
        if (it == counts.end() || it->second < options.min_completed_trips_per_month) missing = Month::from_ordinal(k);
      }
    }
    if (missing) {
      out.excluded[d] = "no qualifying activity in " + missing->to_string();
      continue;
    }
    DriverPayChange c;
    c.driver_id = d;
    try {
      c.pre_rate = pay_per_hour(pre_rows[d], WorkingTime::Tribunal);
      c.post_rate = pay_per_hour(post_rows[d], WorkingTime::Tribunal);
    } catch (const AuditError&) {
      out.excluded[d] = "no working hours in a window";
      continue;
    }
    c.pct_change = (c.post_rate - c.pre_rate) / c.pre_rate * 100.0;
    c.group = c.pct_change < 0.0 ? CohortGroup::PaidLess : CohortGroup::PaidSameOrMore;
    pre_rates.push_back(c.pre_rate);
    post_rates.push_back(c.post_rate);
    out.qualified.push_back(std::move(c));
  }
  out.mean_pre_rate = mean_of(std::move(pre_rates));
  out.mean_post_rate = mean_of(std::move(post_rates));
  return out;
}

double acceptance_rate(std::span<const DispatchOffer> offers, const Period& period) {
  std::size_t offered = 0;
  std::size_t accepted = 0;
  for (const auto& o : offers) {
    if (o.offered_ts < period.start || !(o.offered_ts < period.end)) continue;
    ++offered;
    if (o.accepted) ++accepted;
  }
  if (offered == 0) throw AuditError(ErrorCode::NoOffers, "no dispatch offers in period");
  return static_cast<double>(accepted) / static_cast<double>(offered);
}

double silverman_bandwidth(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  if (v.empty()) throw AuditError(ErrorCode::InvalidArgument, "empty sample");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double mean = mean_of(v);
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mean) * (x - mean));
  const double sd = v.size() > 1 ? std::sqrt(stable_sum(std::move(sq)) / (n - 1.0)) : 0.0;
  const double iqr = (quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  if (!(spread > 0.0)) {
    // Degenerate sample: a narrow kernel relative to the value's magnitude.
    return 1e-2 * std::max(1.0, std::abs(mean));
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeComparison distribution_compare(std::span<const double> a, std::span<const double> b, std::size_t grid_points) {
  if (a.empty() || b.empty()) throw AuditError(ErrorCode::InvalidArgument, "both samples must be non-empty");
  if (grid_points < 3) throw AuditError(ErrorCode::InvalidArgument, "grid needs at least 3 points");
  KdeComparison out;
  out.bandwidth_a = silverman_bandwidth(a);
  out.bandwidth_b = silverman_bandwidth(b);
  const double h = std::max(out.bandwidth_a, out.bandwidth_b);
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin) - 5.0 * h;
  const double hi = std::max(*amax, *bmax) + 5.0 * h;
  out.grid.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    out.grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  auto kde = [&](std::span<const double> xs, double bw) {
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> d(grid_points, 0.0);
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < grid_points; ++i) {
      double s = 0.0;
      for (double x : sorted) {
        const double z = (out.grid[i] - x) / bw;
        s += std::exp(-0.5 * z * z);
      }
      d[i] = s * norm;
    }
    return d;
  };
  out.density_a = kde(a, out.bandwidth_a);
  out.density_b = kde(b, out.bandwidth_b);
  return out;
}

DemographicSummary cohort_summary(std::span<const DriverProfile> profiles) {
  DemographicSummary s;
  s.profiles = profiles.size();
  std::map<std::string, std::size_t> g, a;
  std::size_t g_n = 0, a_n = 0;
  for (const auto& p : profiles) {
    if (p.gender) {
      ++g[std::string(to_string(*p.gender))];
      ++g_n;
    } else {
      ++s.gender_missing;
    }
    if (p.age_band) {
      ++a[std::string(to_string(*p.age_band))];
      ++a_n;
    } else {
      ++s.age_band_missing;
    }
  }
  for (const auto& [k, c] : g) s.gender[k] = static_cast<double>(c) / static_cast<double>(g_n);
  for (const auto& [k, c] : a) s.age_band[k] = static_cast<double>(c) / static_cast<double>(a_n);
  return s;
}

}  // namespace gigaudit
