#include "gigaudit/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "gigaudit/error.hpp"
#include "gigaudit/metrics.hpp"
#include "gigaudit/rng.hpp"

namespace gigaudit {
namespace {

using json = nlohmann::json;
using std::chrono::sys_days;
using std::chrono::sys_seconds;

[[noreturn]] void bad(const std::string& msg) { throw AuditError(ErrorCode::InvalidConfig, msg); }

std::string range_text(const MonthRange& r) { return r.first.to_string() + ":" + r.last.to_string(); }

MonthRange parse_range(const json& v, const char* key) {
  if (!v.is_string()) bad(std::string(key) + " must be a \"YYYY-MM:YYYY-MM\" string");
  try {
    return MonthRange::parse(v.get<std::string>());
  } catch (const AuditError& e) {
    bad(std::string(key) + ": " + e.what());
  }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("bad value for '") + key + "'");
  }
}

void check_known(const json& doc, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, _] : doc.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* c) { return k == c; })) {
      bad("unknown key '" + k + "' in " + where);
    }
  }
}

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Smallest q with (1 - c) * q a whole number, so fares that are multiples of
// q give exact integer driver pay.
std::int64_t fare_quantum(double c) {
  for (std::int64_t q = 1; q <= 10000; ++q) {
    const double v = (1.0 - c) * static_cast<double>(q);
    if (std::abs(v - std::round(v)) < 1e-9) return q;
  }
  return 1;
}

bool is_night(int hour) { return hour >= 22 || hour < 6; }
bool is_peak(int hour) { return (hour >= 7 && hour <= 9) || (hour >= 16 && hour <= 18); }

struct TripDraft {
  std::int64_t request_s = 0, accept_s = 0, pickup_s = 0, dropoff_s = 0, cancel_s = 0;
  bool completed = true;
};

struct DriverPlan {
  int index = 0;
  std::string id;
  double multiplier = 1.0;
  std::optional<Month> missing_month;
  std::string assignment;
  std::string gender;
  std::string age_band;
};

struct DriverOutput {
  GeneratedDriver gen;
  DriverTruth truth;
  std::vector<double> dynamic_fares;  // pounds, dynamic-era completed trips
};

class DriverSim {
 public:
  DriverSim(const GenConfig& cfg, const DriverPlan& plan, const TimeZone& zone)
      : cfg_(cfg), plan_(plan), zone_(zone), rng_(Rng::mix(cfg.seed, static_cast<std::uint64_t>(plan.index))),
        quantum_(fare_quantum(cfg.commission_rate)) {}

  DriverOutput run() {
    DriverOutput out;
    DriverTruth& t = out.truth;
    t.driver_id = plan_.id;
    t.acceptance_parameter = rng_.uniform(cfg_.acceptance_rate[0], cfg_.acceptance_rate[1]);
    t.cohort_assignment = plan_.assignment;
    t.cohort_multiplier = plan_.multiplier;
    t.missing_month = plan_.missing_month;
    t.gender = plan_.gender;
    t.age_band = plan_.age_band;

    const sys_days first = cfg_.months.first.first_day();
    const sys_days end = cfg_.months.last.next().first_day();
    std::vector<sys_days> days;
    {
      std::map<Month, std::vector<sys_days>> by_month;
      for (sys_days d = first; d < end; d += std::chrono::days{1}) {
        const std::chrono::year_month_day ymd{d};
        const Month m{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
        by_month[m].push_back(d);
      }
      for (const auto& [m, ds] : by_month) {
        std::vector<sys_days> active;
        for (sys_days d : ds) {
          if (rng_.bernoulli(cfg_.active_day_probability)) active.push_back(d);
        }
        if (plan_.missing_month && *plan_.missing_month == m) continue;
        if (active.empty()) active.push_back(ds[ds.size() / 2]);
        days.insert(days.end(), active.begin(), active.end());
      }
    }

    NormalizedBundle& b = out.gen.bundle;
    b.driver_id = plan_.id;
    for (sys_days d : days) simulate_day(d, out);

    for (const auto& p : b.payments) {
      const LocalFields lf = zone_.local(p.ts);
      t.weeks[IsoWeek::of(lf.day)].pay_pence += p.amount.minor_units();
      t.months[lf.as_month()].pay_pence += p.amount.minor_units();
    }

    DriverProfile prof;
    prof.driver_id = plan_.id;
    prof.gender = parse_gender(plan_.gender);
    prof.age_band = parse_age_band(plan_.age_band);
    prof.first_trip_ts = b.trips.empty() ? Timestamp::from_seconds(0) : b.trips.front().request_ts;
    if (cfg_.pii_markers) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s Driver %d", kPiiMarker, plan_.index);
      prof.name = buf;
      std::snprintf(buf, sizeof buf, "%s.d%d@example.test", kPiiMarker, plan_.index);
      prof.email = buf;
      std::snprintf(buf, sizeof buf, "%d %s Gardens, London", 10 + plan_.index, kPiiMarker);
      prof.home_address = buf;
      std::snprintf(buf, sizeof buf, "%s%03d", kPiiMarker, plan_.index);
      prof.licence_plate = buf;
    }
    b.profiles.push_back(std::move(prof));

    t.trips_emitted = b.trips.size();
    t.payments_emitted = b.payments.size();
    return out;
  }

 private:
  std::int64_t local_to_utc(sys_days d, std::int64_t seconds_into_day) const {
    return zone_.from_local(sys_seconds{d.time_since_epoch()} + std::chrono::seconds{seconds_into_day}).utc_ms / 1000;
  }

  void simulate_day(sys_days day, DriverOutput& out) {
    NormalizedBundle& b = out.gen.bundle;
    DriverTruth& truth = out.truth;
    const std::chrono::year_month_day ymd{day};
    const Month month{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
    const Era era = era_of(month, cfg_.eras);

    const std::int64_t login_local = 6 * 3600 + static_cast<std::int64_t>(rng_.uniform(0.0, 5.0 * 3600.0));
    const double hours = rng_.uniform(cfg_.session_hours[0], cfg_.session_hours[1]);
    const std::int64_t end_local = std::min<std::int64_t>(login_local + static_cast<std::int64_t>(hours * 3600.0),
                                                          21 * 3600 + 1800);
    const std::int64_t login = local_to_utc(day, login_local);
    const std::int64_t planned_end = local_to_utc(day, end_local);
    double standby_mean = cfg_.standby_mean_minutes * 60.0;
    if (era == Era::DynamicPricing) standby_mean *= cfg_.standby_inflation;

    std::int64_t t = login;
    std::int64_t en_route_s = 0, on_trip_s = 0;
    bool first_trip = true;
    while (true) {
      const auto gap = std::max<std::int64_t>(30, std::llround(rng_.exponential(standby_mean)));
      const std::int64_t request = t + gap;
      if (!first_trip && request >= planned_end) break;
      int declines = 0;
      while (!rng_.bernoulli(out.truth.acceptance_parameter) && declines < 20) ++declines;
      declines = static_cast<int>(std::min<std::int64_t>(declines, gap / 2));
      for (int j = 0; j < declines; ++j) {
        b.dispatches.push_back({plan_.id, Timestamp::from_seconds(t + gap * (j + 1) / (declines + 1)), false});
      }
      b.dispatches.push_back({plan_.id, Timestamp::from_seconds(request), true});
      truth.offers += static_cast<std::size_t>(declines) + 1;
      truth.accepted_offers += 1;

      TripRecord trip;
      trip.driver_id = plan_.id;
      trip.request_ts = Timestamp::from_seconds(request);
      const std::int64_t accept = request + 3 + static_cast<std::int64_t>(rng_.below(18));
      trip.accept_ts = Timestamp::from_seconds(accept);
      const std::int64_t en_route = 60 + static_cast<std::int64_t>(rng_.uniform(60.0, 540.0));
      double dist = std::exp(rng_.normal(std::log(3.5), 0.6));
      dist = std::max(0.3, std::round(dist * 100.0) / 100.0);
      trip.distance_miles = dist;
      const bool airport_o = rng_.bernoulli(cfg_.airport_probability);
      const bool airport_d = rng_.bernoulli(cfg_.airport_probability);
      trip.origin_tag = airport_o ? "airport" : "zone_" + std::to_string(1 + rng_.below(9));
      trip.dest_tag = airport_d ? "airport" : "zone_" + std::to_string(1 + rng_.below(9));
      const double pu = rng_.uniform();
      trip.product = pu < 0.70 ? "UberX" : pu < 0.82 ? "UberXL" : pu < 0.94 ? "Comfort" : "Exec";
      if (cfg_.pii_markers) {
        trip.pickup_address = std::to_string(1 + rng_.below(200)) + " " + kPiiMarker + " Road";
        trip.dropoff_address = std::to_string(1 + rng_.below(200)) + " " + kPiiMarker + " Street";
      }

      const bool cancelled = !first_trip && rng_.bernoulli(cfg_.cancel_probability);
      first_trip = false;
      if (cancelled) {
        const std::int64_t cancel = accept + 1 + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(en_route)));
        trip.cancel_ts = Timestamp::from_seconds(cancel);
        trip.status = rng_.bernoulli(0.7) ? TripStatus::RiderCancelled : TripStatus::DriverCancelled;
        en_route_s += cancel - accept;
        t = cancel;
        b.trips.push_back(std::move(trip));
        continue;
      }

      const auto on_trip =
          std::max<std::int64_t>(120, std::llround(120.0 + dist * 240.0 * std::exp(rng_.normal(0.0, 0.2))));
      const std::int64_t pickup = accept + en_route;
      const std::int64_t dropoff = pickup + on_trip;
      trip.pickup_ts = Timestamp::from_seconds(pickup);
      trip.dropoff_ts = Timestamp::from_seconds(dropoff);
      en_route_s += en_route;
      on_trip_s += on_trip;
      t = dropoff;

      const Month req_month = zone_.local(trip.request_ts).as_month();
      const LocalFields pickup_local = zone_.local(*trip.pickup_ts);
      const double mult = multiplier_for(req_month);
      const double otm = static_cast<double>(on_trip) / 60.0;
      const double erm = static_cast<double>(en_route) / 60.0;
      std::int64_t fare = 0, pay = 0;
      std::optional<std::int64_t> shown_fare;
      if (cfg_.pay_model == PayModel::Era) {
        const double rule = cfg_.fixed_fare.base + cfg_.fixed_fare.per_mile * dist + cfg_.fixed_fare.per_minute * otm;
        const Era trip_era = era_of(req_month, cfg_.eras);
        if (trip_era == Era::DynamicPricing) {
          const double surge = std::exp(rng_.normal(0.0, cfg_.dynamic_share.surge_sd));
          fare = std::max<std::int64_t>(300, std::llround(rule * mult * surge * 100.0));
          const double fare_pounds = static_cast<double>(fare) / 100.0;
          const auto& ds = cfg_.dynamic_share;
          const double share = std::clamp(ds.intercept - ds.slope_per_pound * fare_pounds + rng_.normal(0.0, ds.noise_sd),
                                          ds.min, ds.max);
          pay = std::llround(share * static_cast<double>(fare));
          out.dynamic_fares.push_back(fare_pounds);
        } else {
          const auto q = static_cast<double>(quantum_);
          fare = std::max<std::int64_t>(1, std::llround(rule * mult * 100.0 / q)) * quantum_;
          pay = std::llround((1.0 - cfg_.commission_rate) * static_cast<double>(fare));
          // The exported field during the gap is not the rider price.
          if (trip_era == Era::OpaqueGap) shown_fare = pay;
        }
      } else {
        const bool night = is_night(pickup_local.hour);
        const bool peak = is_peak(pickup_local.hour);
        double pounds;
        if (cfg_.pay_model == PayModel::RegimeSwitch && req_month.year >= cfg_.switch_year) {
          pounds = 9.0 - 0.35 * dist + 0.05 * otm + 0.45 * erm + (airport_o ? 4.0 : 0.0) + (peak ? 2.5 : 0.0);
        } else {
          pounds = 1.8 + 1.1 * dist + 0.22 * otm + 0.08 * erm + (airport_o || airport_d ? 1.5 : 0.0) + (night ? 0.6 : 0.0);
        }
        pounds = std::max(2.5, pounds * mult + rng_.normal(0.0, cfg_.pay_noise_sd));
        pay = std::llround(pounds * 100.0);
        fare = std::llround(static_cast<double>(pay) / (1.0 - cfg_.commission_rate));
      }
      trip.original_fare = Money(shown_fare.value_or(fare));

      const auto jitter = std::llround(std::abs(rng_.normal()) * cfg_.jitter_seconds);
      PaymentEvent payment{plan_.id, Timestamp::from_seconds(dropoff + jitter), PaymentCategory::TripEarnings, Money(pay),
                           std::nullopt};
      truth.pairs.push_back({trip.request_ts.utc_ms, payment.ts.utc_ms});
      b.payments.push_back(std::move(payment));
      if (rng_.bernoulli(cfg_.tip_probability)) {
        PaymentEvent tip{plan_.id, Timestamp::from_seconds(dropoff + jitter + 60 + static_cast<std::int64_t>(rng_.below(840))),
                         PaymentCategory::Tip, Money(100 + static_cast<std::int64_t>(rng_.below(401))), std::nullopt};
        if (cfg_.pii_markers) tip.memo = std::string("Thanks from ") + kPiiMarker + " rider";
        b.payments.push_back(std::move(tip));
      }
      truth.completed_trips += 1;
      truth.months[req_month].completed_trips += 1;
      truth.weeks[IsoWeek::of(zone_.local(trip.request_ts).day)].completed_trips += 1;
      b.trips.push_back(std::move(trip));
    }
    const std::int64_t logout = std::max(planned_end, t + 60);
    b.sessions.push_back({plan_.id, Timestamp::from_seconds(login), Timestamp::from_seconds(logout)});

    const std::int64_t standby_s = (logout - login) - en_route_s - on_trip_s;
    for (StateTotals* s : {&truth.weeks[IsoWeek::of(day)], &truth.months[month]}) {
      s->standby_ms += standby_s * 1000;
      s->en_route_ms += en_route_s * 1000;
      s->on_trip_ms += on_trip_s * 1000;
    }
  }

  double multiplier_for(Month m) const {
    if (!cfg_.cohort || !cfg_.cohort->post.contains(m)) return 1.0;
    return plan_.multiplier;
  }

  const GenConfig& cfg_;
  const DriverPlan& plan_;
  const TimeZone& zone_;
  Rng rng_;
  std::int64_t quantum_;
};

double clamped_mean(double mu, double sd, double lo, double hi) {
  if (sd <= 0.0) return std::clamp(mu, lo, hi);
  const double a = (lo - mu) / sd, b = (hi - mu) / sd;
  return lo * phi_cdf(a) + hi * (1.0 - phi_cdf(b)) + mu * (phi_cdf(b) - phi_cdf(a)) + sd * (phi_pdf(a) - phi_pdf(b));
}

// P(clamp(X) < t) for X ~ N(mu, sd).
double clamped_below(double t, double mu, double sd, double lo, double hi) {
  if (t <= lo) return 0.0;
  if (t > hi) return 1.0;
  if (sd <= 0.0) return mu < t ? 1.0 : 0.0;
  return phi_cdf((t - mu) / sd);
}

DynamicShareTruth dynamic_truth(const std::vector<double>& fares, const DynamicShareModel& ds) {
  DynamicShareTruth out;
  out.trips = fares.size();
  out.edges_pct = default_share_edges_pct();
  const std::size_t bins = out.edges_pct.size() - 1;
  out.bin_probabilities.assign(bins, 0.0);
  if (fares.empty()) return out;
  std::vector<double> mus;
  mus.reserve(fares.size());
  for (double f : fares) mus.push_back(ds.intercept - ds.slope_per_pound * f);
  const double n = static_cast<double>(fares.size());
  auto mixture_below = [&](double x) {
    double s = 0.0;
    for (double mu : mus) s += clamped_below(x, mu, ds.noise_sd, ds.min, ds.max);
    return s / n;
  };
  double mean = 0.0;
  for (double mu : mus) mean += clamped_mean(mu, ds.noise_sd, ds.min, ds.max);
  out.expected_mean = mean / n;
  for (std::size_t i = 0; i < bins; ++i) {
    const double lo = i == 0 ? 0.0 : mixture_below(out.edges_pct[i] / 100.0);
    const double hi = i + 1 == bins ? 1.0 : mixture_below(out.edges_pct[i + 1] / 100.0);
    out.bin_probabilities[i] = hi - lo;
  }
  double a = ds.min, b = ds.max + 1e-9;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (a + b);
    (mixture_below(mid) < 0.5 ? a : b) = mid;
  }
  out.expected_median = 0.5 * (a + b);
  return out;
}

json totals_json(const StateTotals& s) {
  return {{"pay_pence", s.pay_pence},
          {"standby_ms", s.standby_ms},
          {"en_route_ms", s.en_route_ms},
          {"on_trip_ms", s.on_trip_ms},
          {"completed_trips", s.completed_trips}};
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw AuditError(ErrorCode::Io, "cannot write " + p.string());
  f << content;
  if (!f) throw AuditError(ErrorCode::Io, "write failed for " + p.string());
}

}  // namespace

std::string_view to_string(PayModel m) {
  switch (m) {
    case PayModel::Era: return "era";
    case PayModel::Stationary: return "stationary";
    case PayModel::RegimeSwitch: return "regime_switch";
  }
  return "era";
}

GenConfig GenConfig::from_json(const json& doc) {
  if (!doc.is_object()) bad("config must be a JSON object");
  check_known(doc,
              {"seed", "n_drivers", "months", "era_boundaries", "timezone", "commission_rate", "fixed_fare",
               "dynamic_share", "active_day_probability", "standby_mean_minutes", "session_hours",
               "standby_inflation", "cancel_probability", "acceptance_rate", "tip_probability", "jitter_seconds",
               "airport_probability", "corruptions", "gender_mix", "age_band_mix", "cohort", "pay_model",
               "switch_year", "pay_noise_sd", "pii_markers", "jobs"},
              "config");
  GenConfig c;
  read(doc, "seed", c.seed);
  read(doc, "n_drivers", c.n_drivers);
  if (doc.contains("months")) c.months = parse_range(doc["months"], "months");
  if (doc.contains("era_boundaries")) {
    try {
      c.eras = EraBoundaries::parse(doc["era_boundaries"].get<std::string>());
    } catch (const std::exception& e) {
      bad(std::string("era_boundaries: ") + e.what());
    }
  }
  read(doc, "timezone", c.timezone);
  read(doc, "commission_rate", c.commission_rate);
  if (auto it = doc.find("fixed_fare"); it != doc.end()) {
    check_known(*it, {"base", "per_mile", "per_minute"}, "fixed_fare");
    read(*it, "base", c.fixed_fare.base);
    read(*it, "per_mile", c.fixed_fare.per_mile);
    read(*it, "per_minute", c.fixed_fare.per_minute);
  }
  if (auto it = doc.find("dynamic_share"); it != doc.end()) {
    check_known(*it, {"intercept", "slope_per_pound", "noise_sd", "min", "max", "surge_sd"}, "dynamic_share");
    auto& d = c.dynamic_share;
    read(*it, "intercept", d.intercept);
    read(*it, "slope_per_pound", d.slope_per_pound);
    read(*it, "noise_sd", d.noise_sd);
    read(*it, "min", d.min);
    read(*it, "max", d.max);
    read(*it, "surge_sd", d.surge_sd);
  }
  read(doc, "active_day_probability", c.active_day_probability);
  read(doc, "standby_mean_minutes", c.standby_mean_minutes);
  read(doc, "session_hours", c.session_hours);
  read(doc, "standby_inflation", c.standby_inflation);
  read(doc, "cancel_probability", c.cancel_probability);
  read(doc, "acceptance_rate", c.acceptance_rate);
  read(doc, "tip_probability", c.tip_probability);
  read(doc, "jitter_seconds", c.jitter_seconds);
  read(doc, "airport_probability", c.airport_probability);
  if (auto it = doc.find("corruptions"); it != doc.end()) {
    check_known(*it, {"duplicate_rows", "inverted_timestamps", "malformed_money"}, "corruptions");
    read(*it, "duplicate_rows", c.corruptions.duplicate_rows);
    read(*it, "inverted_timestamps", c.corruptions.inverted_timestamps);
    read(*it, "malformed_money", c.corruptions.malformed_money);
  }
  read(doc, "gender_mix", c.gender_mix);
  read(doc, "age_band_mix", c.age_band_mix);
  if (auto it = doc.find("cohort"); it != doc.end() && !it->is_null()) {
    check_known(*it, {"pre", "post", "cut_fraction", "cut_multiplier", "raise_multiplier", "missing_month_drivers"},
                "cohort");
    CohortPlan p;
    if (!it->contains("pre") || !it->contains("post")) bad("cohort needs pre and post windows");
    p.pre = parse_range((*it)["pre"], "cohort.pre");
    p.post = parse_range((*it)["post"], "cohort.post");
    read(*it, "cut_fraction", p.cut_fraction);
    read(*it, "cut_multiplier", p.cut_multiplier);
    read(*it, "raise_multiplier", p.raise_multiplier);
    read(*it, "missing_month_drivers", p.missing_month_drivers);
    c.cohort = p;
  }
  if (auto it = doc.find("pay_model"); it != doc.end()) {
    const std::string m = it->is_string() ? it->get<std::string>() : "";
    if (m == "era") c.pay_model = PayModel::Era;
    else if (m == "stationary") c.pay_model = PayModel::Stationary;
    else if (m == "regime_switch") c.pay_model = PayModel::RegimeSwitch;
    else bad("pay_model must be era, stationary or regime_switch");
  }
  read(doc, "switch_year", c.switch_year);
  read(doc, "pay_noise_sd", c.pay_noise_sd);
  read(doc, "pii_markers", c.pii_markers);
  read(doc, "jobs", c.jobs);
  c.validate();
  return c;
}

GenConfig GenConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) bad("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    bad("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

json GenConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["n_drivers"] = n_drivers;
  j["months"] = range_text(months);
  j["era_boundaries"] = eras.opaque_start.to_string() + "," + eras.dynamic_start.to_string();
  j["timezone"] = timezone;
  j["commission_rate"] = commission_rate;
  j["fixed_fare"] = {{"base", fixed_fare.base}, {"per_mile", fixed_fare.per_mile}, {"per_minute", fixed_fare.per_minute}};
  j["dynamic_share"] = {{"intercept", dynamic_share.intercept}, {"slope_per_pound", dynamic_share.slope_per_pound},
                        {"noise_sd", dynamic_share.noise_sd},   {"min", dynamic_share.min},
                        {"max", dynamic_share.max},             {"surge_sd", dynamic_share.surge_sd}};
  j["active_day_probability"] = active_day_probability;
  j["standby_mean_minutes"] = standby_mean_minutes;
  j["session_hours"] = session_hours;
  j["standby_inflation"] = standby_inflation;
  j["cancel_probability"] = cancel_probability;
  j["acceptance_rate"] = acceptance_rate;
  j["tip_probability"] = tip_probability;
  j["jitter_seconds"] = jitter_seconds;
  j["airport_probability"] = airport_probability;
  j["corruptions"] = {{"duplicate_rows", corruptions.duplicate_rows},
                      {"inverted_timestamps", corruptions.inverted_timestamps},
                      {"malformed_money", corruptions.malformed_money}};
  j["gender_mix"] = gender_mix;
  j["age_band_mix"] = age_band_mix;
  if (cohort) {
    j["cohort"] = {{"pre", range_text(cohort->pre)},
                   {"post", range_text(cohort->post)},
                   {"cut_fraction", cohort->cut_fraction},
                   {"cut_multiplier", cohort->cut_multiplier},
                   {"raise_multiplier", cohort->raise_multiplier},
                   {"missing_month_drivers", cohort->missing_month_drivers}};
  } else {
    j["cohort"] = nullptr;
  }
  j["pay_model"] = std::string(to_string(pay_model));
  j["switch_year"] = switch_year;
  j["pay_noise_sd"] = pay_noise_sd;
  j["pii_markers"] = pii_markers;
  return j;
}

void GenConfig::validate() const {
  if (n_drivers < 1) bad("n_drivers must be at least 1");
  if (n_drivers > 99999) bad("n_drivers is too large");
  if (months.last < months.first) bad("months range is reversed");
  try {
    eras.validate();
    (void)TimeZone::named(timezone);
  } catch (const AuditError& e) {
    bad(e.what());
  }
  if (!(commission_rate >= 0.0 && commission_rate < 1.0)) bad("commission_rate must be in [0, 1)");
  for (auto [name, v] : {std::pair{"active_day_probability", active_day_probability},
                         std::pair{"cancel_probability", cancel_probability},
                         std::pair{"tip_probability", tip_probability},
                         std::pair{"airport_probability", airport_probability},
                         std::pair{"acceptance_rate[0]", acceptance_rate[0]},
                         std::pair{"acceptance_rate[1]", acceptance_rate[1]}}) {
    if (!unit(v)) bad(std::string(name) + " must be in [0, 1]");
  }
  if (acceptance_rate[0] > acceptance_rate[1]) bad("acceptance_rate bounds are reversed");
  if (acceptance_rate[0] <= 0.0) bad("acceptance_rate must be positive");
  if (!(jitter_seconds >= 0.0)) bad("jitter_seconds must be non-negative");
  if (!(standby_mean_minutes > 0.0)) bad("standby_mean_minutes must be positive");
  if (!(standby_inflation > 0.0)) bad("standby_inflation must be positive");
  if (!(session_hours[0] > 0.0 && session_hours[0] <= session_hours[1] && session_hours[1] <= 15.0)) {
    bad("session_hours must satisfy 0 < lo <= hi <= 15");
  }
  if (fixed_fare.base < 0 || fixed_fare.per_mile < 0 || fixed_fare.per_minute < 0) bad("fixed_fare terms must be >= 0");
  const auto& d = dynamic_share;
  if (!(d.noise_sd >= 0.0 && d.surge_sd >= 0.0)) bad("dynamic_share spreads must be >= 0");
  if (!(d.min >= 0.0 && d.min < d.max)) bad("dynamic_share needs 0 <= min < max");
  if (corruptions.duplicate_rows < 0 || corruptions.inverted_timestamps < 0 || corruptions.malformed_money < 0) {
    bad("corruption counts must be >= 0");
  }
  auto check_mix = [](const std::map<std::string, double>& mix, const char* what, auto valid) {
    double total = 0.0;
    for (const auto& [k, v] : mix) {
      if (!valid(k)) bad(std::string("unknown ") + what + " '" + k + "'");
      if (!(v >= 0.0)) bad(std::string(what) + " weights must be >= 0");
      total += v;
    }
    if (!(total > 0.0)) bad(std::string(what) + " mix is empty");
  };
  check_mix(gender_mix, "gender", [](const std::string& k) { return k == "unknown" || parse_gender(k).has_value(); });
  check_mix(age_band_mix, "age_band",
            [](const std::string& k) { return k == "unknown" || parse_age_band(k).has_value(); });
  if (cohort) {
    if (!unit(cohort->cut_fraction)) bad("cohort.cut_fraction must be in [0, 1]");
    if (!(cohort->cut_multiplier > 0.0 && cohort->raise_multiplier > 0.0)) bad("cohort multipliers must be positive");
    if (cohort->missing_month_drivers < 0 || cohort->missing_month_drivers > n_drivers) {
      bad("cohort.missing_month_drivers out of range");
    }
  }
  if (jobs < 1) bad("jobs must be at least 1");
}

std::map<std::string, int> apportion(const std::map<std::string, double>& mix, int n) {
  double total = 0.0;
  for (const auto& [_, v] : mix) total += v;
  std::map<std::string, int> out;
  std::vector<std::pair<double, std::string>> rema;
  int assigned = 0;
  for (const auto& [k, v] : mix) {
    const double exact = total > 0.0 ? v / total * n : 0.0;
    const int whole = static_cast<int>(std::floor(exact + 1e-9));
    out[k] = whole;
    assigned += whole;
    rema.emplace_back(exact - whole, k);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n && i < rema.size(); ++i, ++assigned) ++out[rema[i].second];
  return out;
}

const DriverTruth* GroundTruth::driver(const std::string& id) const {
  auto it = std::lower_bound(drivers.begin(), drivers.end(), id,
                             [](const DriverTruth& d, const std::string& v) { return d.driver_id < v; });
  return it != drivers.end() && it->driver_id == id ? &*it : nullptr;
}

json GroundTruth::to_json() const {
  json j;
  j["config"] = config.to_json();
  j["pii_marker"] = kPiiMarker;
  json ds = {{"trips", dynamic_share.trips},
             {"expected_mean", dynamic_share.expected_mean},
             {"expected_median", dynamic_share.expected_median},
             {"edges_pct", dynamic_share.edges_pct},
             {"bin_probabilities", dynamic_share.bin_probabilities}};
  j["dynamic_share"] = ds;
  j["demographics"] = {{"gender", gender_counts}, {"age_band", age_band_counts}};
  json cor = json::array();
  for (const auto& c : corruptions) cor.push_back({{"driver_id", c.driver_id}, {"kind", c.kind}, {"table", c.table}});
  j["corruptions"] = cor;
  json paid_less = json::array(), paid_more = json::array(), excluded = json::array();
  json drivers_json = json::object();
  for (const auto& d : drivers) {
    json dj;
    dj["trips_emitted"] = d.trips_emitted;
    dj["payments_emitted"] = d.payments_emitted;
    dj["completed_trips"] = d.completed_trips;
    dj["offers"] = d.offers;
    dj["accepted_offers"] = d.accepted_offers;
    dj["acceptance_parameter"] = d.acceptance_parameter;
    dj["cohort_assignment"] = d.cohort_assignment;
    dj["cohort_multiplier"] = d.cohort_multiplier;
    dj["missing_month"] = d.missing_month ? json(d.missing_month->to_string()) : json(nullptr);
    dj["gender"] = d.gender;
    dj["age_band"] = d.age_band;
    json weeks = json::object();
    for (const auto& [w, s] : d.weeks) weeks[w.to_string()] = totals_json(s);
    dj["weeks"] = weeks;
    json months = json::object();
    for (const auto& [m, s] : d.months) months[m.to_string()] = totals_json(s);
    dj["months"] = months;
    json pairs = json::array();
    for (const auto& p : d.pairs) pairs.push_back({p.trip_request_ms, p.payment_ms});
    dj["pairs"] = pairs;
    drivers_json[d.driver_id] = std::move(dj);
    if (d.cohort_assignment == "cut") paid_less.push_back(d.driver_id);
    if (d.cohort_assignment == "raise") paid_more.push_back(d.driver_id);
    if (d.cohort_assignment == "missing_month") excluded.push_back(d.driver_id);
  }
  j["drivers"] = drivers_json;
  if (config.cohort) {
    j["cohort"] = {{"pre", range_text(config.cohort->pre)},
                   {"post", range_text(config.cohort->post)},
                   {"paid_less", paid_less},
                   {"paid_same_or_more", paid_more},
                   {"excluded", excluded}};
  }
  return j;
}

std::vector<GeneratedDriver> generate_bundles(const GenConfig& config, GroundTruth& truth) {
  config.validate();
  const TimeZone zone = TimeZone::named(config.timezone);
  Rng master(Rng::mix(config.seed, 0xC0FFEEull));
  const int n = config.n_drivers;

  std::vector<DriverPlan> plans(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "driver_%04d", i + 1);
    plans[static_cast<std::size_t>(i)].index = i + 1;
    plans[static_cast<std::size_t>(i)].id = buf;
  }

  auto assign_mix = [&](const std::map<std::string, double>& mix, std::string DriverPlan::*field,
                        std::map<std::string, int>& counts) {
    counts = apportion(mix, n);
    std::vector<std::string> labels;
    for (const auto& [k, c] : counts) labels.insert(labels.end(), static_cast<std::size_t>(c), k);
    master.shuffle(labels);
    for (int i = 0; i < n; ++i) plans[static_cast<std::size_t>(i)].*field = labels[static_cast<std::size_t>(i)];
  };
  assign_mix(config.gender_mix, &DriverPlan::gender, truth.gender_counts);
  assign_mix(config.age_band_mix, &DriverPlan::age_band, truth.age_band_counts);

  if (config.cohort) {
    const CohortPlan& cp = *config.cohort;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    master.shuffle(order);
    const int missing = cp.missing_month_drivers;
    const int cut = static_cast<int>(std::lround(cp.cut_fraction * (n - missing)));
    for (int k = 0; k < n; ++k) {
      DriverPlan& p = plans[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
      if (k < missing) {
        p.assignment = "missing_month";
        p.missing_month = Month::from_ordinal(cp.post.first.ordinal() + static_cast<int>(master.below(static_cast<std::uint64_t>(cp.post.size()))));
      } else if (k < missing + cut) {
        p.assignment = "cut";
        p.multiplier = cp.cut_multiplier;
      } else {
        p.assignment = "raise";
        p.multiplier = cp.raise_multiplier;
      }
    }
  }

  std::vector<DriverOutput> outputs(static_cast<std::size_t>(n));
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < outputs.size(); i = next++) {
        outputs[i] = DriverSim(config, plans[i], zone).run();
      }
    };
    const int workers = std::min(config.jobs, n);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }

  // Corruptions are extra rows, spread round-robin over drivers.
  std::vector<std::pair<std::string, int>> kinds = {{"duplicate_row", config.corruptions.duplicate_rows},
                                                    {"inverted_timestamps", config.corruptions.inverted_timestamps},
                                                    {"malformed_money", config.corruptions.malformed_money}};
  int k = 0;
  for (const auto& [kind, count] : kinds) {
    for (int c = 0; c < count; ++c, ++k) {
      DriverOutput& o = outputs[static_cast<std::size_t>(k % n)];
      auto& trips = o.gen.bundle.trips;
      std::vector<std::size_t> completed;
      for (std::size_t i = 0; i < trips.size(); ++i) {
        if (trips[i].completed()) completed.push_back(i);
      }
      const std::size_t pick = completed[master.below(completed.size())];
      if (kind == "duplicate_row") {
        const TripRecord copy = trips[pick];
        trips.insert(trips.begin() + static_cast<std::ptrdiff_t>(pick) + 1, copy);
        truth.corruptions.push_back({o.truth.driver_id, kind, "trips"});
      } else if (kind == "inverted_timestamps") {
        TripRecord bad_trip = trips[pick];
        bad_trip.request_ts = bad_trip.request_ts + 1000;
        std::swap(bad_trip.pickup_ts, bad_trip.dropoff_ts);
        trips.push_back(std::move(bad_trip));
        truth.corruptions.push_back({o.truth.driver_id, kind, "trips"});
      } else {
        const Timestamp ts = *trips[pick].dropoff_ts + 3'600'000;
        o.gen.extra_payment_rows.push_back({o.truth.driver_id, format_timestamp(ts), "adjustment", "12.3.4"});
        truth.corruptions.push_back({o.truth.driver_id, kind, "payments"});
      }
      o.truth.trips_emitted = trips.size();
      o.truth.payments_emitted = o.gen.bundle.payments.size() + o.gen.extra_payment_rows.size();
    }
  }

  std::vector<double> dynamic_fares;
  std::vector<GeneratedDriver> result;
  truth.config = config;
  truth.drivers.clear();
  for (auto& o : outputs) {
    dynamic_fares.insert(dynamic_fares.end(), o.dynamic_fares.begin(), o.dynamic_fares.end());
    truth.drivers.push_back(std::move(o.truth));
    result.push_back(std::move(o.gen));
  }
  truth.dynamic_share = dynamic_truth(dynamic_fares, config.dynamic_share);
  return result;
}

GroundTruth generate(const GenConfig& config, const std::filesystem::path& out_dir) {
  GroundTruth truth;
  const auto drivers = generate_bundles(config, truth);
  namespace fs = std::filesystem;
  const fs::path root = out_dir / "bundles";
  fs::create_directories(root);
  for (const auto& d : drivers) {
    const fs::path dir = root / d.bundle.driver_id;
    fs::create_directories(dir);
    auto files = serialize_bundle(d.bundle);
    if (!d.extra_payment_rows.empty()) {
      std::string& text = files["payments.csv"];
      const std::size_t width = parse_csv_text(text.substr(0, text.find('\n') + 1)).header.size();
      for (auto row : d.extra_payment_rows) {
        row.resize(width);
        append_csv_row(text, row);
      }
    }
    for (const auto& [name, content] : files) write_file(dir / name, content);
  }
  write_file(out_dir / "ground_truth.json", truth.to_json().dump(1) + "\n");
  return truth;
}

}  // namespace gigaudit
