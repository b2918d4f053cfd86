#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "windbid/errors.hpp"
#include "windbid/scenario.hpp"

namespace windbid {

namespace {

// Least squares y = X b; returns coefficients and fills residuals.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd& resid) {
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  resid = y - x * beta;
  return beta;
}

// Regression of series[t] on an intercept and `order` lags, for t >= order.
Eigen::VectorXd fit_long_ar(std::span<const double> s, int order, std::vector<double>& innovations) {
  const int n = static_cast<int>(s.size());
  const int rows = n - order;
  Eigen::MatrixXd x(rows, order + 1);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = r + order;
    y[r] = s[t];
    x(r, 0) = 1.0;
    for (int k = 1; k <= order; ++k) x(r, k) = s[t - k];
  }
  Eigen::VectorXd resid;
  const Eigen::VectorXd beta = ols(x, y, resid);
  innovations.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < rows; ++r) innovations[r + order] = resid[r];
  return beta;
}

}  // namespace

void ResidualDistribution::validate() const {
  if (kind == Kind::Empirical) {
    if (sample.empty()) throw DataError("empirical residual distribution needs a nonempty sample");
    for (double v : sample)
      if (!std::isfinite(v)) throw DataError("residual sample has non-finite entries");
  } else if (!(stddev > 0.0) || !std::isfinite(mean)) {
    throw DataError("gaussian residual distribution needs stddev > 0");
  }
}

void ArmaModel::validate() const {
  if (p < 0 || q < 0) throw DataError("ARMA orders must be nonnegative");
  if (static_cast<int>(ar.size()) != p || static_cast<int>(ma.size()) != q)
    throw DimensionMismatch("ARMA coefficient vectors do not match the declared orders");
  residuals.validate();
}

bool is_stationary(const ArmaModel& model) {
  if (model.p == 0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(model.p, model.p);
  for (int i = 0; i < model.p; ++i) companion(0, i) = model.ar[i];
  for (int i = 1; i < model.p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = companion.eigenvalues();
  // Companion eigenvalues are the reciprocals of the polynomial roots.
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (std::abs(eig[i]) >= 1.0) return false;
  return true;
}

ArmaModel fit_arma(std::span<const double> series, int p, int q, const FitOptions& options) {
  if (p < 0 || q < 0) throw DataError("ARMA orders must be nonnegative");
  const int n = static_cast<int>(series.size());
  if (n < 10 * (p + q + 1))
    throw InsufficientData("series of length " + std::to_string(n) + " is shorter than 10(p+q+1) = " +
                           std::to_string(10 * (p + q + 1)));
  double mean = 0.0;
  for (double v : series) {
    if (!std::isfinite(v)) throw DataError("series has non-finite entries");
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= n;
  if (var < 1e-12) throw DegenerateSeries("series variance below 1e-12");

  std::vector<double> innov;
  int start = p;
  if (q > 0) {
    int m = options.long_ar_order > 0 ? options.long_ar_order : std::max(20, 2 * (p + q));
    m = std::min(m, (n - 1) / 3);
    m = std::max(m, 1);
    fit_long_ar(series, m, innov);
    start = std::max(p, m + q);
  }

  const int rows = n - start;
  const int cols = 1 + p + q;
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = r + start;
    y[r] = series[t];
    x(r, 0) = 1.0;
    for (int k = 1; k <= p; ++k) x(r, k) = series[t - k];
    for (int k = 1; k <= q; ++k) x(r, p + k) = innov[t - k];
  }
  Eigen::VectorXd resid;
  const Eigen::VectorXd beta = ols(x, y, resid);

  ArmaModel model;
  model.p = p;
  model.q = q;
  model.intercept = beta[0];
  for (int k = 1; k <= p; ++k) model.ar.push_back(beta[k]);
  for (int k = 1; k <= q; ++k) model.ma.push_back(beta[p + k]);

  model.residuals.kind = options.residual_kind;
  if (options.residual_kind == ResidualDistribution::Kind::Empirical) {
    model.residuals.sample.assign(resid.data(), resid.data() + resid.size());
  } else {
    const double mu = resid.mean();
    model.residuals.mean = mu;
    model.residuals.stddev = std::sqrt((resid.array() - mu).square().sum() / std::max<Eigen::Index>(1, rows - 1));
    if (!(model.residuals.stddev > 0.0)) throw DegenerateSeries("fitted residuals have zero spread");
  }
  return model;
}

std::vector<double> sample_noise(const ArmaModel& model, int horizon, std::uint64_t seed) {
  model.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<double> e(static_cast<std::size_t>(horizon));
  const auto& dist = model.residuals;
  if (dist.kind == ResidualDistribution::Kind::Empirical) {
    std::uniform_int_distribution<std::size_t> pick(0, dist.sample.size() - 1);
    for (auto& v : e) v = dist.sample[pick(rng)];
  } else {
    std::normal_distribution<double> normal(dist.mean, dist.stddev);
    for (auto& v : e) v = normal(rng);
  }
  std::vector<double> y(static_cast<std::size_t>(horizon), 0.0);
  for (int t = 0; t < horizon; ++t) {
    double v = e[t];
    for (int k = 1; k <= model.p && t - k >= 0; ++k) v += model.ar[k - 1] * y[t - k];
    for (int k = 1; k <= model.q && t - k >= 0; ++k) v += model.ma[k - 1] * e[t - k];
    y[t] = v;
  }
  return y;
}

}  // namespace windbid
