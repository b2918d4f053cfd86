#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "windbid/market.hpp"

namespace windbid {

struct ResidualDistribution {
  enum class Kind { Empirical, Gaussian };
  Kind kind = Kind::Empirical;
  std::vector<double> sample;  // Empirical
  double mean = 0.0;           // Gaussian
  double stddev = 1.0;         // Gaussian

  void validate() const;
};

struct ArmaModel {
  int p = 0;
  int q = 0;
  std::vector<double> ar;  // phi_1..phi_p
  std::vector<double> ma;  // theta_1..theta_q
  double intercept = 0.0;
  ResidualDistribution residuals;

  void validate() const;
};

// True when every root of 1 - phi_1 z - ... - phi_p z^p lies outside the unit
// circle. Fitting does not reject non-stationary models; callers warn.
bool is_stationary(const ArmaModel& model);

struct FitOptions {
  ResidualDistribution::Kind residual_kind = ResidualDistribution::Kind::Empirical;
  int long_ar_order = 0;  // 0 = max(20, 2(p+q)), capped so the regression stays overdetermined
};

// Hannan-Rissanen estimation with an intercept. Throws InsufficientData when
// the series is shorter than 10(p+q+1) and DegenerateSeries when its variance
// is below 1e-12.
ArmaModel fit_arma(std::span<const double> series, int p, int q, const FitOptions& options = {});

// Zero-mean ARMA path of the given length driven by innovations drawn from
// the residual distribution, started from a zero pre-sample state. The
// intercept is not added: the path is a perturbation around a forecast.
std::vector<double> sample_noise(const ArmaModel& model, int horizon, std::uint64_t seed);

struct PowerCurve {
  double cut_in = 3.0;
  double rated_speed = 12.0;
  double cut_out = 25.0;
  double rated_power = 400.0;

  void validate() const;
};

double speed_to_power(const PowerCurve& curve, double speed);

// up = kappa_up * max(RT, 0) + floor_up, op = kappa_op * max(RT, 0).
// With cover_da the up price uses max(RT, DA, 0) instead, so a day-ahead
// sale can never be covered by buying shortfall more cheaply.
struct PenaltyConfig {
  double kappa_up = 1.5;
  double floor_up = 5.0;
  double kappa_op = 0.5;
  bool cover_da = true;
};

struct NoiseModels {
  ArmaModel price;
  ArmaModel wind;
  PowerCurve curve;
};

// Perturbs the day's RT price forecast and wind-speed forecast with
// independent noise paths per scenario. Scenario w uses seed + w.
ScenarioSet generate_scenarios(const MarketDay& day, const ArmaModel& price_model, const ArmaModel& wind_model,
                               const PowerCurve& curve, int n, std::uint64_t seed, const PenaltyConfig& penalty = {});

nlohmann::json to_json(const ArmaModel& model);
ArmaModel arma_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PowerCurve& curve);
PowerCurve power_curve_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NoiseModels& models);
NoiseModels noise_models_from_json(const nlohmann::json& j);

}  // namespace windbid
