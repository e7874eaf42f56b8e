#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigaudit/ingest.hpp"
#include "gigaudit/time.hpp"

namespace gigaudit {

enum class PayModel { Era, Stationary, RegimeSwitch };

std::string_view to_string(PayModel m);

struct FixedFareRule {
  double base = 2.50;
  double per_mile = 1.25;
  double per_minute = 0.15;
};

// Dynamic-era share: clamp(intercept - slope * fare + N(0, noise_sd), min, max)
// with fare in pounds. Rider fares carry a log-normal surge multiplier.
struct DynamicShareModel {
  double intercept = 0.95;
  double slope_per_pound = 0.015;
  double noise_sd = 0.08;
  double min = 0.30;
  double max = 1.60;
  double surge_sd = 0.25;
};

struct CorruptionCounts {
  int duplicate_rows = 0;
  int inverted_timestamps = 0;
  int malformed_money = 0;
  int total() const { return duplicate_rows + inverted_timestamps + malformed_money; }
};

struct CohortPlan {
  MonthRange pre;
  MonthRange post;
  double cut_fraction = 0.8;
  double cut_multiplier = 0.75;
  double raise_multiplier = 1.25;
  int missing_month_drivers = 0;  // drivers given an empty month in `post`
};

struct GenConfig {
  std::uint64_t seed = 42;
  int n_drivers = 10;
  MonthRange months{{2021, 1}, {2021, 12}};
  EraBoundaries eras;
  std::string timezone = "Europe/London";

  double commission_rate = 0.25;
  FixedFareRule fixed_fare;
  DynamicShareModel dynamic_share;

  double active_day_probability = 0.55;
  double standby_mean_minutes = 12.0;  // mean gap before each request
  std::array<double, 2> session_hours{4.0, 9.0};
  double standby_inflation = 1.3;  // standby multiplier from the dynamic era on
  double cancel_probability = 0.04;
  std::array<double, 2> acceptance_rate{0.6, 0.95};
  double tip_probability = 0.1;
  double jitter_seconds = 60.0;
  double airport_probability = 0.05;

  CorruptionCounts corruptions;
  std::map<std::string, double> gender_mix{{"M", 0.8}, {"F", 0.15}, {"other", 0.05}};
  std::map<std::string, double> age_band_mix{{"20-29", 0.2}, {"30-39", 0.35}, {"40-49", 0.3}, {"50+", 0.15}};
  std::optional<CohortPlan> cohort;

  PayModel pay_model = PayModel::Era;
  int switch_year = 2022;
  double pay_noise_sd = 0.25;  // pounds, stationary and regime_switch only

  bool pii_markers = true;
  int jobs = 1;

  static GenConfig from_json(const nlohmann::json& doc);
  static GenConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

// Every string planted in a PII field contains this token.
inline constexpr const char* kPiiMarker = "ZQXMARK";

struct StateTotals {
  std::int64_t pay_pence = 0;
  std::int64_t standby_ms = 0;
  std::int64_t en_route_ms = 0;
  std::int64_t on_trip_ms = 0;
  std::int64_t completed_trips = 0;
};

struct TruePair {
  std::int64_t trip_request_ms = 0;
  std::int64_t payment_ms = 0;
};

struct DriverTruth {
  std::string driver_id;
  std::size_t trips_emitted = 0;
  std::size_t payments_emitted = 0;
  std::size_t completed_trips = 0;
  std::size_t offers = 0;
  std::size_t accepted_offers = 0;
  double acceptance_parameter = 0.0;
  std::string cohort_assignment;  // cut, raise, missing_month or empty
  double cohort_multiplier = 1.0;
  std::optional<Month> missing_month;
  std::string gender;
  std::string age_band;
  std::map<IsoWeek, StateTotals> weeks;
  std::map<Month, StateTotals> months;
  std::vector<TruePair> pairs;
};

struct CorruptionRecord {
  std::string driver_id;
  std::string kind;
  std::string table;
};

// Expected share statistics of the dynamic-era trips given their drawn fares.
struct DynamicShareTruth {
  std::size_t trips = 0;
  double expected_mean = 0.0;
  double expected_median = 0.0;
  std::vector<int> edges_pct;
  std::vector<double> bin_probabilities;
};

struct GroundTruth {
  GenConfig config;
  std::vector<DriverTruth> drivers;  // sorted by id
  std::vector<CorruptionRecord> corruptions;
  DynamicShareTruth dynamic_share;
  std::map<std::string, int> gender_counts;
  std::map<std::string, int> age_band_counts;

  const DriverTruth* driver(const std::string& id) const;
  nlohmann::json to_json() const;
};

struct GeneratedDriver {
  NormalizedBundle bundle;
  std::vector<std::vector<std::string>> extra_payment_rows;  // raw, possibly unparseable
};

// In-memory generation; `generate` writes the same content to disk.
std::vector<GeneratedDriver> generate_bundles(const GenConfig& config, GroundTruth& truth);

// Writes <out>/bundles/<driver_id>/*.csv and <out>/ground_truth.json.
GroundTruth generate(const GenConfig& config, const std::filesystem::path& out_dir);

// Integer counts per category summing to n (largest remainder, ties by key).
std::map<std::string, int> apportion(const std::map<std::string, double>& mix, int n);

}  // namespace gigaudit
