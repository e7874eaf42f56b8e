#include "gigaudit/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <thread>

#include "gigaudit/csv.hpp"
#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

using json = nlohmann::json;

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

json stats_json(const TakeRateStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"share_at_or_above_0_75", s.share_at_or_above}, {"units", s.units}};
}

json histogram_json(const ShareHistogram& h) {
  json bins = json::array();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    bins.push_back({{"bin", h.label(i)},
                    {"count", h.counts[i]},
                    {"fraction", h.total ? static_cast<double>(h.counts[i]) / static_cast<double>(h.total) : 0.0}});
  }
  return {{"bins", bins}, {"total", h.total}};
}

json take_rate_block(std::span<const LinkedTrip> linked) {
  json j;
  j["histogram"] = histogram_json(take_rate_histogram(linked));
  const std::size_t valid = static_cast<std::size_t>(
      std::count_if(linked.begin(), linked.end(), [](const LinkedTrip& l) { return l.has_share(); }));
  if (valid > 0) {
    j["by_trip"] = stats_json(take_rate_stats(linked, GroupBy::Trip));
    j["by_driver"] = stats_json(take_rate_stats(linked, GroupBy::Driver));
  } else {
    j["by_trip"] = nullptr;
    j["by_driver"] = nullptr;
  }
  return j;
}

struct PaySums {
  std::int64_t pence = 0;
  double tribunal = 0.0;
  double platform = 0.0;
  std::size_t weeks = 0;

  void add(const WeeklyPayRow& r) {
    pence += r.net_pay.minor_units();
    tribunal += r.hours_tribunal;
    platform += r.hours_platform;
    ++weeks;
  }
  json to_json() const {
    const double pounds = static_cast<double>(pence) / 100.0;
    return {{"net_pay_pence", pence},
            {"hours_tribunal", tribunal},
            {"hours_platform", platform},
            {"weeks", weeks},
            {"pay_per_hour_tribunal", opt_num(ratio(pounds, tribunal))},
            {"pay_per_hour_platform", opt_num(ratio(pounds, platform))}};
  }
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Rows of objects to CSV with the given column order.
std::string table_csv(const json& rows, const std::vector<std::string>& cols) {
  std::string out;
  append_csv_row(out, cols);
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    for (const auto& c : cols) cells.push_back(r.contains(c) ? csv_cell(r[c]) : "");
    append_csv_row(out, cells);
  }
  return out;
}

}  // namespace

void PipelineOptions::sync() {
  link.eras = ingest.eras;
  link.zone = ingest.zone;
}

PipelineRun run_pipeline(const std::filesystem::path& root, const PipelineOptions& options) {
  if (!std::filesystem::is_directory(root)) {
    throw AuditError(ErrorCode::Io, "bundle root " + root.string() + " is not a directory");
  }
  const auto dirs = find_bundle_dirs(root);
  PipelineRun run;
  run.bundles_found = dirs.size();
  std::vector<std::optional<DriverAudit>> slots(dirs.size());
  std::vector<std::string> errors(dirs.size());

  auto process = [&](std::size_t i) {
    try {
      DriverAudit d;
      d.bundle = dirs[i].filename().string();
      d.data = ingest_bundle(dirs[i], options.columns, options.ingest);
      d.links = link(d.data.trips, d.data.payments, options.link);
      d.segments = build_segments(d.data.sessions, d.data.trips);
      d.weeks = weekly_rows(d.data.driver_id, d.data.payments, d.segments.segments, options.ingest.zone);
      slots[i] = std::move(d);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < dirs.size(); i = next++) process(i);
  };
  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(dirs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (slots[i]) {
      run.drivers.push_back(std::move(*slots[i]));
    } else {
      run.failures[dirs[i].filename().string()] = errors[i];
    }
  }
  return run;
}

std::vector<LinkedTrip> all_linked(const PipelineRun& run) {
  std::vector<LinkedTrip> out;
  for (const auto& d : run.drivers) out.insert(out.end(), d.links.linked.begin(), d.links.linked.end());
  return out;
}

json build_audit_report(const PipelineRun& run, const AuditOptions& options) {
  const PipelineOptions& po = options.pipeline;
  const TimeZone& zone = po.ingest.zone;
  const EraBoundaries& eras = po.ingest.eras;
  json report;

  // meta
  {
    json drivers = json::array();
    for (const auto& d : run.drivers) drivers.push_back(d.data.driver_id);
    json opts = {{"link_window_seconds", po.link.window_seconds},
                 {"link_early_seconds", po.link.early_seconds},
                 {"era_boundaries", eras.opaque_start.to_string() + "," + eras.dynamic_start.to_string()},
                 {"timezone", zone.name()},
                 {"naive_timestamps", po.ingest.naive == NaiveTimestamps::Utc ? "utc" : "local"},
                 {"weeks", "iso"}};
    if (options.cohort_pre) opts["cohort_pre"] = options.cohort_pre->first.to_string() + ":" + options.cohort_pre->last.to_string();
    if (options.cohort_post) opts["cohort_post"] = options.cohort_post->first.to_string() + ":" + options.cohort_post->last.to_string();
    report["meta"] = {{"bundles_found", run.bundles_found},
                      {"bundles_processed", run.drivers.size()},
                      {"failed_bundles", run.failures},
                      {"drivers", drivers},
                      {"options", opts}};
  }

  // ingest
  {
    json per = json::object();
    std::map<TableKind, TableCounts> totals;
    std::size_t quarantined = 0;
    for (const auto& d : run.drivers) {
      per[d.bundle] = d.data.report.to_json();
      for (const auto& [k, c] : d.data.report.counts) {
        auto& t = totals[k];
        t.rows_in += c.rows_in;
        t.normalized += c.normalized;
        t.deduped += c.deduped;
        t.quarantined += c.quarantined;
      }
      quarantined += d.data.report.quarantine.size();
    }
    json tot = json::object();
    for (const auto& [k, c] : totals) {
      tot[std::string(to_string(k))] = {
          {"rows_in", c.rows_in}, {"normalized", c.normalized}, {"deduped", c.deduped}, {"quarantined", c.quarantined}};
    }
    report["ingest"] = {{"bundles", per}, {"totals", tot}, {"quarantined_rows", quarantined}};
  }

  std::vector<LinkedTrip> linked = all_linked(run);
  std::vector<ActivitySegment> segments;
  std::vector<TripRecord> trips;
  std::vector<WeeklyPayRow> weeks;
  std::size_t orphans = 0;
  for (const auto& d : run.drivers) {
    segments.insert(segments.end(), d.segments.segments.begin(), d.segments.segments.end());
    trips.insert(trips.end(), d.data.trips.begin(), d.data.trips.end());
    weeks.insert(weeks.end(), d.weeks.begin(), d.weeks.end());
    orphans += d.segments.orphan_trips.size();
  }

  // linkage
  {
    std::size_t unmatched_trips = 0, unmatched_payments = 0, valid = 0;
    json per = json::object();
    for (const auto& d : run.drivers) {
      unmatched_trips += d.links.unmatched_trips.size();
      unmatched_payments += d.links.unmatched_payments.size();
      per[d.bundle] = d.links.unmatched_report();
    }
    for (const auto& l : linked) valid += l.has_share() ? 1 : 0;
    report["linkage"] = {{"linked_trips", linked.size()},
                         {"share_valid_trips", valid},
                         {"unmatched_trips", unmatched_trips},
                         {"unmatched_payments", unmatched_payments},
                         {"unmatched", per}};
  }

  // pay per hour
  {
    json weekly = json::array();
    std::map<Month, PaySums> monthly;
    std::map<Era, PaySums> by_era;
    PaySums overall;
    for (const auto& r : weeks) {
      const Month m = week_month(r.week);
      const double pounds = r.net_pay.pounds();
      weekly.push_back({{"driver_id", r.driver_id},
                        {"week", r.week.to_string()},
                        {"month", m.to_string()},
                        {"net_pay_pence", r.net_pay.minor_units()},
                        {"hours_tribunal", r.hours_tribunal},
                        {"hours_platform", r.hours_platform},
                        {"pay_per_hour_tribunal", opt_num(ratio(pounds, r.hours_tribunal))},
                        {"pay_per_hour_platform", opt_num(ratio(pounds, r.hours_platform))}});
      monthly[m].add(r);
      by_era[era_of(m, eras)].add(r);
      overall.add(r);
    }
    json months = json::array();
    std::map<Month, double> trib_series, plat_series;
    for (const auto& [m, s] : monthly) {
      json row = s.to_json();
      row["month"] = m.to_string();
      row["era"] = std::string(to_string(era_of(m, eras)));
      months.push_back(row);
      if (s.tribunal > 0.0) trib_series[m] = static_cast<double>(s.pence) / 100.0 / s.tribunal;
      if (s.platform > 0.0) plat_series[m] = static_cast<double>(s.pence) / 100.0 / s.platform;
    }
    json eras_json = json::object();
    for (const auto& [e, s] : by_era) eras_json[std::string(to_string(e))] = s.to_json();

    json inflation = nullptr;
    if (options.rpi && !trib_series.empty()) {
      const Month base = options.rpi_base.value_or(std::min(trib_series.rbegin()->first, options.rpi->last()));
      try {
        const auto real_t = adjust_inflation(trib_series, *options.rpi, base);
        const auto real_p = adjust_inflation(plat_series, *options.rpi, base);
        for (auto& row : months) {
          const Month m = Month::parse(row["month"].get<std::string>());
          row["real_pay_per_hour_tribunal"] = real_t.contains(m) ? json(real_t.at(m)) : json(nullptr);
          row["real_pay_per_hour_platform"] = real_p.contains(m) ? json(real_p.at(m)) : json(nullptr);
        }
        inflation = {{"base_month", base.to_string()}};
      } catch (const AuditError& e) {
        inflation = {{"base_month", base.to_string()}, {"error", e.what()}};
      }
    }
    report["pay_per_hour"] = {{"weekly", weekly},      {"monthly", months},      {"by_era", eras_json},
                              {"overall", overall.to_json()}, {"inflation", inflation}, {"orphan_trips", orphans}};
  }

  // utilisation
  {
    std::map<Month, std::array<double, 3>> hours;
    std::map<Month, int> days;
    for (const auto& d : run.drivers) {
      std::set<Month> months;
      for (const auto& s : d.segments.segments) {
        months.insert(zone.local(s.start_ts).as_month());
        months.insert(zone.local(s.end_ts + (-1)).as_month());
      }
      for (Month m : months) {
        const Utilisation u = utilisation_daily(d.segments.segments, m, zone);
        if (u.active_days == 0) continue;
        auto& h = hours[m];
        h[0] += u.standby_hours_per_day * u.active_days;
        h[1] += u.en_route_hours_per_day * u.active_days;
        h[2] += u.on_trip_hours_per_day * u.active_days;
        days[m] += u.active_days;
      }
    }
    json rows = json::array();
    for (const auto& [m, h] : hours) {
      const double n = days[m];
      rows.push_back({{"month", m.to_string()},
                      {"era", std::string(to_string(era_of(m, eras)))},
                      {"driver_days", days[m]},
                      {"standby_hours_per_day", h[0] / n},
                      {"en_route_hours_per_day", h[1] / n},
                      {"on_trip_hours_per_day", h[2] / n}});
    }
    report["utilisation"] = rows;
  }

  // take rates
  {
    json j = take_rate_block(linked);
    std::map<Era, std::vector<LinkedTrip>> per_era;
    for (const auto& l : linked) per_era[era_of(l.trip.request_ts, eras, zone)].push_back(l);
    json eras_json = json::object();
    for (const auto& [e, v] : per_era) eras_json[std::string(to_string(e))] = take_rate_block(v);
    j["by_era"] = eras_json;

    std::vector<double> fixed, dynamic;
    for (const auto& l : linked) {
      if (!l.driver_share) continue;
      const Era e = era_of(l.trip.request_ts, eras, zone);
      if (e == Era::FixedCommission) fixed.push_back(*l.driver_share);
      if (e == Era::DynamicPricing) dynamic.push_back(*l.driver_share);
    }
    if (!fixed.empty() && !dynamic.empty()) {
      const KdeComparison k = distribution_compare(fixed, dynamic);
      j["kde"] = {{"a", "fixed_commission"}, {"b", "dynamic_pricing"},
                  {"grid", k.grid},           {"density_a", k.density_a},
                  {"density_b", k.density_b}, {"bandwidth_a", k.bandwidth_a},
                  {"bandwidth_b", k.bandwidth_b}};
    } else {
      j["kde"] = nullptr;
    }
    report["take_rates"] = j;
  }

  // surplus
  {
    json rows = json::array();
    std::optional<Month> lo, hi;
    for (const auto& l : linked) {
      const Month m = zone.local(l.trip.request_ts).as_month();
      if (!lo || m < *lo) lo = m;
      if (!hi || *hi < m) hi = m;
    }
    if (lo) {
      for (const auto& p : surplus_per_on_trip_hour(linked, segments, MonthRange{*lo, *hi}, zone)) {
        rows.push_back({{"month", p.month.to_string()},
                        {"pounds_per_hour", opt_num(p.pounds_per_hour)},
                        {"status", std::string(to_string(p.status))},
                        {"fare_minus_pay_pence", p.fare_minus_pay.minor_units()},
                        {"on_trip_hours", p.on_trip_hours},
                        {"trips", p.trips}});
      }
    }
    report["surplus"] = rows;
  }

  // per-minute split
  {
    const SplitRates sr = per_minute_fare_by_split(linked);
    json bins = json::array();
    for (const auto& b : sr.bins) {
      bins.push_back({{"bin", std::to_string(b.lo_pct) + "-" + std::to_string(b.hi_pct)},
                      {"trips", b.trips},
                      {"driver_pence", b.driver_pence},
                      {"platform_pence", b.platform_pence},
                      {"fare_pence", b.fare_pence},
                      {"on_trip_minutes", static_cast<double>(b.on_trip_ms) / 60'000.0},
                      {"driver_per_min", b.driver_per_min},
                      {"platform_per_min", b.platform_per_min},
                      {"fare_per_min", b.fare_per_min}});
    }
    report["per_minute_split"] = {{"bins", bins}, {"skipped_trips", sr.skipped_trips}};
  }

  // cohort
  if (options.cohort_pre && options.cohort_post) {
    try {
      const CohortSplit cs = cohort_pay_change(weeks, trips, *options.cohort_pre, *options.cohort_post, zone);
      json q = json::array();
      for (const auto& d : cs.qualified) {
        q.push_back({{"driver_id", d.driver_id},
                     {"pre_rate", d.pre_rate},
                     {"post_rate", d.post_rate},
                     {"pct_change", d.pct_change},
                     {"group", std::string(to_string(d.group))}});
      }
      report["cohort"] = {{"window_pre", options.cohort_pre->first.to_string() + ":" + options.cohort_pre->last.to_string()},
                          {"window_post", options.cohort_post->first.to_string() + ":" + options.cohort_post->last.to_string()},
                          {"qualified", q},
                          {"excluded", cs.excluded},
                          {"paid_less", cs.members(CohortGroup::PaidLess).size()},
                          {"paid_same_or_more", cs.members(CohortGroup::PaidSameOrMore).size()},
                          {"mean_pre_rate", cs.mean_pre_rate},
                          {"mean_post_rate", cs.mean_post_rate}};
    } catch (const AuditError& e) {
      report["cohort"] = {{"error", e.what()}};
    }
  } else {
    report["cohort"] = nullptr;
  }

  // acceptance
  {
    const Period all{Timestamp{std::numeric_limits<std::int64_t>::min() / 4},
                     Timestamp{std::numeric_limits<std::int64_t>::max() / 4}};
    json per = json::object();
    std::size_t offers = 0, accepted = 0;
    for (const auto& d : run.drivers) {
      if (d.data.dispatches.empty()) continue;
      per[d.data.driver_id] = acceptance_rate(d.data.dispatches, all);
      offers += d.data.dispatches.size();
      for (const auto& o : d.data.dispatches) accepted += o.accepted ? 1 : 0;
    }
    report["acceptance"] = {{"by_driver", per},
                            {"offers", offers},
                            {"accepted", accepted},
                            {"pooled", offers ? json(static_cast<double>(accepted) / static_cast<double>(offers)) : json(nullptr)}};
  }

  // demographics
  {
    std::vector<DriverProfile> profiles;
    for (const auto& d : run.drivers) profiles.insert(profiles.end(), d.data.profiles.begin(), d.data.profiles.end());
    const DemographicSummary s = cohort_summary(profiles);
    report["demographics"] = {{"profiles", s.profiles},
                              {"gender", s.gender},
                              {"age_band", s.age_band},
                              {"gender_missing", s.gender_missing},
                              {"age_band_missing", s.age_band_missing}};
  }
  return report;
}

json round_floats(const json& value, int digits) {
  switch (value.type()) {
    case json::value_t::object: {
      json out = json::object();
      for (const auto& [k, v] : value.items()) out[k] = round_floats(v, digits);
      return out;
    }
    case json::value_t::array: {
      json out = json::array();
      for (const auto& v : value) out.push_back(round_floats(v, digits));
      return out;
    }
    case json::value_t::number_float: {
      const double d = value.get<double>();
      if (!std::isfinite(d)) return nullptr;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*g", digits, d);
      double r = std::strtod(buf, nullptr);
      if (r == 0.0) r = 0.0;  // drop negative zero
      return r;
    }
    default:
      return value;
  }
}

std::string dump_report(const json& report) { return round_floats(report).dump(2) + "\n"; }

std::map<std::string, std::string> audit_csv_tables(const json& report) {
  std::map<std::string, std::string> out;
  const json r = round_floats(report);
  out["weekly_pay.csv"] = table_csv(r["pay_per_hour"]["weekly"],
                                    {"driver_id", "week", "month", "net_pay_pence", "hours_tribunal", "hours_platform",
                                     "pay_per_hour_tribunal", "pay_per_hour_platform"});
  out["monthly_pay.csv"] = table_csv(r["pay_per_hour"]["monthly"],
                                     {"month", "era", "net_pay_pence", "hours_tribunal", "hours_platform",
                                      "pay_per_hour_tribunal", "pay_per_hour_platform", "real_pay_per_hour_tribunal",
                                      "real_pay_per_hour_platform"});
  out["utilisation.csv"] = table_csv(r["utilisation"], {"month", "era", "driver_days", "standby_hours_per_day",
                                                        "en_route_hours_per_day", "on_trip_hours_per_day"});
  out["take_rate_histogram.csv"] = table_csv(r["take_rates"]["histogram"]["bins"], {"bin", "count", "fraction"});
  out["surplus.csv"] = table_csv(r["surplus"], {"month", "pounds_per_hour", "status", "fare_minus_pay_pence",
                                                "on_trip_hours", "trips"});
  out["per_minute_split.csv"] =
      table_csv(r["per_minute_split"]["bins"], {"bin", "trips", "driver_pence", "platform_pence", "fare_pence",
                                                "on_trip_minutes", "driver_per_min", "platform_per_min", "fare_per_min"});
  if (r["cohort"].is_object() && r["cohort"].contains("qualified")) {
    out["cohort.csv"] = table_csv(r["cohort"]["qualified"], {"driver_id", "pre_rate", "post_rate", "pct_change", "group"});
  }
  return out;
}

}  // namespace gigaudit
