#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "windbid/scenario.hpp"

namespace fixture {

// Small hand-set noise models: AR(1) price noise (sd 5) and AR(1) wind-speed
// noise (sd 1).
inline windbid::NoiseModels simple_models() {
  using windbid::ResidualDistribution;
  windbid::NoiseModels m;
  m.price.p = 1;
  m.price.ar = {0.5};
  m.price.residuals.kind = ResidualDistribution::Kind::Gaussian;
  m.price.residuals.stddev = 5.0;
  m.wind.p = 1;
  m.wind.ar = {0.8};
  m.wind.residuals.kind = ResidualDistribution::Kind::Gaussian;
  m.wind.residuals.stddev = 1.0;
  return m;
}

// Reference ARMA generator with burn-in, independent of sample_noise.
inline std::vector<double> simulate_arma(const std::vector<double>& phi, const std::vector<double>& theta, double mu,
                                         int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int burn = 500;
  std::vector<double> x(static_cast<std::size_t>(n + burn), 0.0), e(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    e[t] = normal(rng);
    double v = mu + e[t];
    for (std::size_t k = 1; k <= phi.size() && k <= t; ++k) v += phi[k - 1] * (x[t - k] - mu);
    for (std::size_t k = 1; k <= theta.size() && k <= t; ++k) v += theta[k - 1] * e[t - k];
    x[t] = v;
  }
  return {x.begin() + burn, x.end()};
}

}  // namespace fixture
