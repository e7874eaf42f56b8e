#include "gigaudit/ols.hpp"

#include <algorithm>
#include <cmath>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

// In-place Cholesky of a symmetric positive-definite matrix (lower factor).
void cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw AuditError(ErrorCode::Underdetermined, "normal equations are not positive definite");
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double> b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
  return b;
}

}  // namespace

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw AuditError(ErrorCode::InvalidArgument, "row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double OlsModel::predict(std::span<const double> x) const {
  if (x.size() != means.size()) throw AuditError(ErrorCode::InvalidArgument, "feature width mismatch");
  double y = target_mean;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (standardized_coefficients[j] != 0.0) y += standardized_coefficients[j] * (x[j] - means[j]) / stdevs[j];
  }
  return y;
}

std::vector<double> OlsModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

OlsModel fit_ols(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (y.size() != n) throw AuditError(ErrorCode::InvalidArgument, "X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
  if (n <= d) {
    throw AuditError(ErrorCode::Underdetermined,
                     std::to_string(n) + " rows for " + std::to_string(d) + " features");
  }
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (feature_names.size() != d) throw AuditError(ErrorCode::InvalidArgument, "feature name count mismatch");

  OlsModel m;
  m.feature_names = std::move(feature_names);
  m.means.assign(d, 0.0);
  m.stdevs.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.means[j] += x(i, j);
  }
  for (auto& v : m.means) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - m.means[j];
      m.stdevs[j] += c * c;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < d; ++j) {
    m.stdevs[j] = std::sqrt(m.stdevs[j] / static_cast<double>(n));
    if (m.stdevs[j] > 1e-12 * std::max(1.0, std::abs(m.means[j]))) {
      active.push_back(j);
    } else {
      m.stdevs[j] = 1.0;
      m.dropped_columns.push_back(m.feature_names[j]);
    }
  }
  for (double v : y) m.target_mean += v;
  m.target_mean /= static_cast<double>(n);

  const std::size_t k = active.size();
  std::vector<double> gram(k * k, 0.0);
  std::vector<double> rhs(k, 0.0);
  std::vector<double> z(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) z[a] = (x(i, active[a]) - m.means[active[a]]) / m.stdevs[active[a]];
    const double yc = y[i] - m.target_mean;
    for (std::size_t a = 0; a < k; ++a) {
      const double za = z[a];
      if (za == 0.0) continue;
      rhs[a] += za * yc;
      double* g = gram.data() + a * k;
      for (std::size_t b = 0; b <= a; ++b) g[b] += za * z[b];
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < a; ++b) gram[b * k + a] = gram[a * k + b];
  }
  m.standardized_coefficients.assign(d, 0.0);
  if (k > 0) {
    double trace = 0.0;
    for (std::size_t a = 0; a < k; ++a) trace += gram[a * k + a];
    const double eps = 1e-8 * trace / static_cast<double>(k);
    for (std::size_t a = 0; a < k; ++a) gram[a * k + a] += eps;
    cholesky(gram, k);
    const std::vector<double> beta = cholesky_solve(gram, k, rhs);
    for (std::size_t a = 0; a < k; ++a) m.standardized_coefficients[active[a]] = beta[a];
  }

  m.coefficients.assign(d, 0.0);
  m.intercept = m.target_mean;
  for (std::size_t j = 0; j < d; ++j) {
    m.coefficients[j] = m.standardized_coefficients[j] / m.stdevs[j];
    m.intercept -= m.coefficients[j] * m.means[j];
  }
  return m;
}

double r2_score(std::span<const double> y, std::span<const double> predicted) {
  if (y.size() != predicted.size()) throw AuditError(ErrorCode::InvalidArgument, "length mismatch");
  if (y.empty()) throw AuditError(ErrorCode::ZeroVarianceTarget, "empty target");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - predicted[i]) * (y[i] - predicted[i]);
  }
  if (!(ss_tot > 0.0)) throw AuditError(ErrorCode::ZeroVarianceTarget, "test target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double r2(const OlsModel& model, const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw AuditError(ErrorCode::InvalidArgument, "shape mismatch");
  const auto pred = model.predict(x);
  return r2_score(y, pred);
}

}  // namespace gigaudit
