#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigaudit/linkage.hpp"
#include "gigaudit/ols.hpp"

namespace gigaudit {

// Trip feature layout: durations and distance, hour/day/month one-hots,
// airport flags, product one-hots, then interaction terms.
class FeatureSchema {
 public:
  static FeatureSchema standard();  // 64 features
  explicit FeatureSchema(std::vector<std::string> products, bool interactions = true);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t dimension() const { return names_.size(); }
  const std::vector<std::string>& products() const { return products_; }
  bool interactions() const { return interactions_; }
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> products_;
  bool interactions_ = true;
  std::vector<std::string> names_;
};

struct FeatureVector {
  std::vector<double> values;
  double target = 0.0;  // driver pay in pounds
  int year = 0;         // local calendar year of pickup
};

bool is_airport_tag(std::string_view tag);

FeatureVector featurize(const LinkedTrip& trip, const FeatureSchema& schema, const TimeZone& zone);

enum class MatrixMode { SingleYear, Cumulative };

std::string_view to_string(MatrixMode m);

struct YearMatrixOptions {
  std::uint64_t seed = 7;
  double test_fraction = 0.2;
  std::size_t min_train_rows = 0;  // 0 -> 2 x feature dimension
  std::size_t min_test_rows = 10;
  int jobs = 1;
  FeatureSchema schema = FeatureSchema::standard();
  TimeZone zone = TimeZone::london();
};

struct MatrixCell {
  std::optional<double> r2;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::string note;  // why r2 is empty
};

struct YearMatrix {
  MatrixMode mode = MatrixMode::SingleYear;
  std::vector<int> years;
  int max_lag = 0;
  std::map<std::pair<int, int>, MatrixCell> cells;  // (test year, lag)

  const MatrixCell* cell(int test_year, int lag) const;
  // Rows are test years, columns Y, Y-1, ... Empty cells are blank.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// single_year: train on year Y-n, test on Y (n = 0 uses a seeded 80/20
// split of Y). cumulative: train on every year <= Y-n pooled.
YearMatrix year_matrix(std::span<const LinkedTrip> trips, MatrixMode mode, const YearMatrixOptions& options = {});

}  // namespace gigaudit
