#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gigaudit/linkage.hpp"
#include "gigaudit/model.hpp"
#include "gigaudit/worktime.hpp"

namespace gigaudit {

// ---- pay per hour -------------------------------------------------------

struct WeeklyPayRow {
  std::string driver_id;
  IsoWeek week;
  Money net_pay;
  double hours_tribunal = 0.0;
  double hours_platform = 0.0;
};

// Signed sum of every payment category inside the local ISO week.
Money weekly_pay(const std::vector<PaymentEvent>& payments, IsoWeek week, const TimeZone& zone);

// One row per ISO week touched by any payment or segment, sorted by week.
std::vector<WeeklyPayRow> weekly_rows(const std::string& driver_id, const std::vector<PaymentEvent>& payments,
                                      const std::vector<ActivitySegment>& segments, const TimeZone& zone);

// ISO weeks are attributed to the month containing their Thursday.
Month week_month(IsoWeek week);

struct WeekRange {
  IsoWeek first;
  IsoWeek last;
  bool contains(IsoWeek w) const { return first <= w && w <= last; }
};

// Pooled ratio: sum of net pay over sum of hours. Throws ZeroHours.
double pay_per_hour(std::span<const WeeklyPayRow> rows, WorkingTime definition);
double pay_per_hour(std::span<const WeeklyPayRow> rows, const WeekRange& period, WorkingTime definition);

// Rescales each month's value into base-month pounds. The monthly factor is
// (1 + yoy/100)^(1/12), compounded over the months between value and base.
std::map<Month, double> adjust_inflation(const std::map<Month, double>& series, const RpiSeries& rpi, Month base);

// ---- take rates ----------------------------------------------------------

// Default driver-share bin edges in percent: 0,50,60,...,110,150.
const std::vector<int>& default_share_edges_pct();

struct ShareHistogram {
  std::vector<int> edges_pct;
  std::vector<std::size_t> counts;  // counts[i] covers [edges[i], edges[i+1])
  std::size_t total = 0;

  std::string label(std::size_t bin) const;  // "50-60"
};

// Index of the bin holding `share`. The first bin is open below and the last
// open above, so every share lands somewhere.
std::size_t share_bin(double share, const std::vector<int>& edges_pct);

ShareHistogram take_rate_histogram(std::span<const LinkedTrip> linked,
                                   const std::vector<int>& edges_pct = default_share_edges_pct());

enum class GroupBy { Trip, Driver };

struct TakeRateStats {
  double mean = 0.0;
  double median = 0.0;
  double share_at_or_above = 0.0;  // fraction of units with share >= threshold
  std::size_t units = 0;           // trips or drivers
};

TakeRateStats take_rate_stats(std::span<const LinkedTrip> linked, GroupBy group_by, double threshold = 0.75);

// ---- surplus ---------------------------------------------------------------

enum class SurplusStatus { Direct, Interpolated, UnbracketedGap };

std::string_view to_string(SurplusStatus s);

struct SurplusPoint {
  Month month;
  std::optional<double> pounds_per_hour;
  SurplusStatus status = SurplusStatus::Direct;
  Money fare_minus_pay;
  double on_trip_hours = 0.0;
  std::size_t trips = 0;

  bool interpolated() const { return status == SurplusStatus::Interpolated; }
};

// Linear interpolation across interior gaps; gaps touching either end stay
// empty. Returns the status per element.
std::vector<SurplusStatus> fill_gaps(std::vector<std::optional<double>>& values);

// Sum of (rider fare - driver pay) over share-valid trips in each month,
// divided by the on-trip hours of the drivers behind those trips.
std::vector<SurplusPoint> surplus_per_on_trip_hour(std::span<const LinkedTrip> linked,
                                                   std::span<const ActivitySegment> segments, MonthRange months,
                                                   const TimeZone& zone);

// ---- per-minute fare by split ----------------------------------------------

struct SplitBinRate {
  int lo_pct = 0;
  int hi_pct = 0;
  std::size_t trips = 0;
  std::int64_t driver_pence = 0;
  std::int64_t platform_pence = 0;
  std::int64_t fare_pence = 0;
  std::int64_t on_trip_ms = 0;
  double driver_per_min = 0.0;
  double platform_per_min = 0.0;
  double fare_per_min = 0.0;
};

struct SplitRates {
  std::vector<SplitBinRate> bins;
  std::size_t skipped_trips = 0;  // no share or zero on-trip duration
};

SplitRates per_minute_fare_by_split(std::span<const LinkedTrip> linked,
                                    const std::vector<int>& edges_pct = default_share_edges_pct());

// ---- cohorts ------------------------------------------------------------------

enum class CohortGroup { PaidLess, PaidSameOrMore };

std::string_view to_string(CohortGroup g);

struct DriverPayChange {
  std::string driver_id;
  double pre_rate = 0.0;
  double post_rate = 0.0;
  double pct_change = 0.0;
  CohortGroup group = CohortGroup::PaidSameOrMore;
};

struct CohortSplit {
  MonthRange window_pre;
  MonthRange window_post;
  std::vector<DriverPayChange> qualified;  // sorted by driver id
  std::map<std::string, std::string> excluded;  // driver id -> reason
  double mean_pre_rate = 0.0;
  double mean_post_rate = 0.0;

  std::vector<std::string> members(CohortGroup g) const;
};

struct CohortOptions {
  int min_completed_trips_per_month = 1;
};

// Drivers qualify with enough completed trips in every month of both
// windows. Rates are pooled tribunal pay per hour within each window.
CohortSplit cohort_pay_change(std::span<const WeeklyPayRow> rows, std::span<const TripRecord> trips,
                              const MonthRange& window_pre, const MonthRange& window_post, const TimeZone& zone,
                              const CohortOptions& options = {});

// ---- acceptance, distributions, demographics -----------------------------------

double acceptance_rate(std::span<const DispatchOffer> offers, const Period& period);

struct KdeComparison {
  std::vector<double> grid;
  std::vector<double> density_a;
  std::vector<double> density_b;
  double bandwidth_a = 0.0;
  double bandwidth_b = 0.0;
};

// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> values);

KdeComparison distribution_compare(std::span<const double> a, std::span<const double> b, std::size_t grid_points = 401);

struct DemographicSummary {
  std::size_t profiles = 0;
  std::map<std::string, double> gender;
  std::map<std::string, double> age_band;
  std::size_t gender_missing = 0;
  std::size_t age_band_missing = 0;
};

DemographicSummary cohort_summary(std::span<const DriverProfile> profiles);

// Helpers shared with the report.
double median_of(std::vector<double> values);
double mean_of(std::vector<double> values);

}  // namespace gigaudit
