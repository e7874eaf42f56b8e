#include "gigaudit/predictability.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <thread>

#include "gigaudit/error.hpp"
#include "gigaudit/rng.hpp"

namespace gigaudit {
namespace {

const char* const kDayNames[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::string two_digit(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

struct Job {
  int test_year = 0;
  int lag = 0;
};

}  // namespace

FeatureSchema FeatureSchema::standard() { return FeatureSchema({"UberX", "UberXL", "Comfort", "Exec"}, true); }

FeatureSchema::FeatureSchema(std::vector<std::string> products, bool interactions)
    : products_(std::move(products)), interactions_(interactions) {
  names_ = {"on_trip_min", "en_route_min", "distance_miles"};
  for (int h = 0; h < 24; ++h) names_.push_back("hour_" + two_digit(h));
  for (const char* d : kDayNames) names_.push_back(std::string("dow_") + d);
  for (int m = 1; m <= 12; ++m) names_.push_back("month_" + two_digit(m));
  names_.push_back("airport_origin");
  names_.push_back("airport_dest");
  for (const auto& p : products_) names_.push_back("product_" + p);
  if (interactions_) {
    for (const char* n : {"distance_x_on_trip_min", "distance_sq", "on_trip_min_sq", "en_route_x_distance",
                          "airport_origin_x_distance", "airport_dest_x_distance", "weekend_x_distance",
                          "weekend_x_on_trip_min", "night_x_distance", "night_x_on_trip_min", "peak_x_distance",
                          "peak_x_on_trip_min"}) {
      names_.emplace_back(n);
    }
  }
  std::vector<std::string> sorted = names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw AuditError(ErrorCode::InvalidArgument, "duplicate feature names (repeated product?)");
  }
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw AuditError(ErrorCode::InvalidArgument, "no feature '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool is_airport_tag(std::string_view tag) {
  std::string s(tag);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s.find("airport") != std::string::npos;
}

FeatureVector featurize(const LinkedTrip& lt, const FeatureSchema& schema, const TimeZone& zone) {
  const TripRecord& t = lt.trip;
  if (!t.completed() || !t.accept_ts || !t.pickup_ts || !t.dropoff_ts) {
    throw AuditError(ErrorCode::IncompleteTrip, "trip lacks completed timestamps");
  }
  FeatureVector f;
  f.values.assign(schema.dimension(), 0.0);
  const double on_trip = static_cast<double>(*t.dropoff_ts - *t.pickup_ts) / 60'000.0;
  const double en_route = static_cast<double>(*t.pickup_ts - *t.accept_ts) / 60'000.0;
  const double dist = t.distance_miles;
  const LocalFields local = zone.local(*t.pickup_ts);
  const bool origin_airport = is_airport_tag(t.origin_tag);
  const bool dest_airport = is_airport_tag(t.dest_tag);
  const bool weekend = local.day_of_week >= 5;
  const bool night = local.hour >= 22 || local.hour < 6;
  const bool peak = (local.hour >= 7 && local.hour <= 9) || (local.hour >= 16 && local.hour <= 18);

  std::size_t i = 0;
  auto& v = f.values;
  v[i++] = on_trip;
  v[i++] = en_route;
  v[i++] = dist;
  v[i + static_cast<std::size_t>(local.hour)] = 1.0;
  i += 24;
  v[i + static_cast<std::size_t>(local.day_of_week)] = 1.0;
  i += 7;
  v[i + static_cast<std::size_t>(local.month - 1)] = 1.0;
  i += 12;
  v[i++] = origin_airport ? 1.0 : 0.0;
  v[i++] = dest_airport ? 1.0 : 0.0;
  for (const auto& p : schema.products()) v[i++] = t.product == p ? 1.0 : 0.0;
  if (schema.interactions()) {
    v[i++] = dist * on_trip;
    v[i++] = dist * dist;
    v[i++] = on_trip * on_trip;
    v[i++] = en_route * dist;
    v[i++] = origin_airport ? dist : 0.0;
    v[i++] = dest_airport ? dist : 0.0;
    v[i++] = weekend ? dist : 0.0;
    v[i++] = weekend ? on_trip : 0.0;
    v[i++] = night ? dist : 0.0;
    v[i++] = night ? on_trip : 0.0;
    v[i++] = peak ? dist : 0.0;
    v[i++] = peak ? on_trip : 0.0;
  }
  f.target = lt.driver_total.pounds();
  f.year = local.year;
  return f;
}

std::string_view to_string(MatrixMode m) { return m == MatrixMode::SingleYear ? "single_year" : "cumulative"; }

const MatrixCell* YearMatrix::cell(int test_year, int lag) const {
  auto it = cells.find({test_year, lag});
  return it == cells.end() ? nullptr : &it->second;
}

std::string YearMatrix::to_csv() const {
  std::string out = "test_year";
  for (int n = 0; n <= max_lag; ++n) out += n == 0 ? ",Y" : ",Y-" + std::to_string(n);
  out += '\n';
  for (int y : years) {
    out += std::to_string(y);
    for (int n = 0; n <= max_lag; ++n) {
      out += ',';
      const MatrixCell* c = cell(y, n);
      if (c && c->r2) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *c->r2);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

nlohmann::json YearMatrix::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& [key, c] : cells) {
    nlohmann::json j = {{"test_year", key.first}, {"lag", key.second}, {"train_rows", c.train_rows},
                        {"test_rows", c.test_rows}};
    j["r2"] = c.r2 ? nlohmann::json(*c.r2) : nlohmann::json(nullptr);
    if (!c.note.empty()) j["note"] = c.note;
    cells_json.push_back(std::move(j));
  }
  return {{"mode", std::string(to_string(mode))}, {"years", years}, {"max_lag", max_lag}, {"cells", cells_json}};
}

YearMatrix year_matrix(std::span<const LinkedTrip> trips, MatrixMode mode, const YearMatrixOptions& options) {
  const FeatureSchema& schema = options.schema;
  const std::size_t dim = schema.dimension();
  const std::size_t min_train = options.min_train_rows > 0 ? options.min_train_rows : 2 * dim;

  std::map<int, std::vector<FeatureVector>> by_year;
  for (const auto& lt : trips) {
    if (!lt.trip.completed() || !lt.trip.accept_ts || !lt.trip.pickup_ts || !lt.trip.dropoff_ts) continue;
    FeatureVector f = featurize(lt, schema, options.zone);
    by_year[f.year].push_back(std::move(f));
  }
  if (by_year.size() < 2) {
    throw AuditError(ErrorCode::InvalidArgument, "need at least two years of trips, found " + std::to_string(by_year.size()));
  }

  // Canonical order within a year, then a seeded shuffle for the split.
  std::map<int, std::vector<std::size_t>> train_part, test_part;
  for (auto& [year, rows] : by_year) {
    std::sort(rows.begin(), rows.end(), [](const FeatureVector& a, const FeatureVector& b) {
      return std::tie(a.values, a.target) < std::tie(b.values, b.target);
    });
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(Rng::mix(options.seed, static_cast<std::uint64_t>(year)));
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(std::ceil(options.test_fraction * static_cast<double>(idx.size())));
    test_part[year].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_test, idx.size())));
    train_part[year].assign(idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_test, idx.size())), idx.end());
  }

  YearMatrix result;
  result.mode = mode;
  for (const auto& [y, _] : by_year) result.years.push_back(y);
  result.max_lag = result.years.back() - result.years.front();

  std::vector<Job> jobs;
  for (int y : result.years) {
    for (int n = 0; n <= y - result.years.front(); ++n) jobs.push_back({y, n});
  }
  std::vector<MatrixCell> out(jobs.size());

  auto run = [&](const Job& job) {
    MatrixCell cell;
    Matrix xtr(0, dim), xte(0, dim);
    std::vector<double> ytr, yte;
    auto add_rows = [&](int year, const std::vector<std::size_t>* subset, Matrix& x, std::vector<double>& y) {
      auto it = by_year.find(year);
      if (it == by_year.end()) return;
      const auto& rows = it->second;
      if (subset) {
        for (std::size_t i : *subset) {
          x.append_row(rows[i].values);
          y.push_back(rows[i].target);
        }
      } else {
        for (const auto& r : rows) {
          x.append_row(r.values);
          y.push_back(r.target);
        }
      }
    };
    const int train_year = job.test_year - job.lag;
    if (mode == MatrixMode::SingleYear) {
      if (job.lag == 0) {
        add_rows(train_year, &train_part.at(train_year), xtr, ytr);
        add_rows(job.test_year, &test_part.at(job.test_year), xte, yte);
      } else {
        add_rows(train_year, nullptr, xtr, ytr);
        add_rows(job.test_year, nullptr, xte, yte);
      }
    } else {
      for (int y : result.years) {
        if (y < train_year) add_rows(y, nullptr, xtr, ytr);
      }
      if (job.lag == 0) {
        add_rows(train_year, &train_part.at(train_year), xtr, ytr);
        add_rows(job.test_year, &test_part.at(job.test_year), xte, yte);
      } else {
        add_rows(train_year, nullptr, xtr, ytr);
        add_rows(job.test_year, nullptr, xte, yte);
      }
    }
    cell.train_rows = ytr.size();
    cell.test_rows = yte.size();
    if (ytr.size() < std::max(min_train, dim + 1)) {
      cell.note = "insufficient training rows";
    } else if (yte.size() < options.min_test_rows) {
      cell.note = "insufficient test rows";
    } else {
      try {
        const OlsModel model = fit_ols(xtr, ytr, schema.names());
        cell.r2 = r2(model, xte, yte);
      } catch (const AuditError& e) {
        cell.note = e.what();
      }
    }
    return cell;
  };

  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = run(jobs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = run(jobs[i]);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) result.cells[{jobs[i].test_year, jobs[i].lag}] = std::move(out[i]);
  return result;
}

}  // namespace gigaudit
