#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gigaudit {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  void append_row(std::span<const double> values);
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Linear model fitted on standardized features. `coefficients` and
// `intercept` are expressed in the original feature units; prediction goes
// through the standardized form.
struct OlsModel {
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::vector<double> means;
  std::vector<double> stdevs;
  std::vector<double> standardized_coefficients;  // 0 for dropped columns
  double target_mean = 0.0;
  std::vector<std::string> dropped_columns;  // zero-variance features

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

// Solves (ZᵀZ + εI)β = Zᵀ(y - ȳ) on standardized features Z with
// ε = 1e-8 · trace(ZᵀZ) / d. Zero-variance columns are dropped.
OlsModel fit_ols(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names = {});

// 1 - SS_res / SS_tot with SS_tot about the mean of y.
double r2_score(std::span<const double> y, std::span<const double> predicted);
double r2(const OlsModel& model, const Matrix& x, std::span<const double> y);

}  // namespace gigaudit
