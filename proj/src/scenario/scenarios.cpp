#include <algorithm>
#include <cmath>

#include "windbid/errors.hpp"
#include "windbid/scenario.hpp"

namespace windbid {

namespace {

constexpr int kNoiseModelVersion = 1;
constexpr std::uint64_t kWindStream = 0x9e3779b97f4a7c15ULL;

const char* kind_name(ResidualDistribution::Kind k) {
  return k == ResidualDistribution::Kind::Empirical ? "empirical" : "gaussian";
}

}  // namespace

void PowerCurve::validate() const {
  if (!(cut_in > 0.0 && cut_in < rated_speed && rated_speed < cut_out))
    throw ConfigError("power curve needs 0 < cut_in < rated_speed < cut_out");
  if (!(rated_power > 0.0)) throw ConfigError("power curve needs rated_power > 0");
}

double speed_to_power(const PowerCurve& c, double speed) {
  if (speed < c.cut_in || speed >= c.cut_out) return 0.0;
  if (speed >= c.rated_speed) return c.rated_power;
  const double lo = c.cut_in * c.cut_in * c.cut_in;
  const double hi = c.rated_speed * c.rated_speed * c.rated_speed;
  return c.rated_power * (speed * speed * speed - lo) / (hi - lo);
}

ScenarioSet generate_scenarios(const MarketDay& day, const ArmaModel& price_model, const ArmaModel& wind_model,
                               const PowerCurve& curve, int n, std::uint64_t seed, const PenaltyConfig& penalty) {
  day.validate();
  if (n < 1) throw DataError("scenario count must be >= 1");
  if (day.wind_speed_forecast.empty()) throw DataError("scenario generation needs a wind speed forecast");
  curve.validate();
  price_model.validate();
  wind_model.validate();

  const int horizon = day.horizon();
  ScenarioSet s;
  s.prob.assign(static_cast<std::size_t>(n), 1.0 / n);
  for (int w = 0; w < n; ++w) {
    const std::uint64_t ws = seed + static_cast<std::uint64_t>(w);
    const auto price_noise = sample_noise(price_model, horizon, ws);
    const auto wind_noise = sample_noise(wind_model, horizon, ws ^ kWindStream);
    std::vector<double> g(horizon), rt(horizon), up(horizon), op(horizon);
    for (int t = 0; t < horizon; ++t) {
      rt[t] = day.rt_price_forecast[t] + price_noise[t];
      const double speed = std::max(0.0, day.wind_speed_forecast[t] + wind_noise[t]);
      g[t] = std::max(0.0, speed_to_power(curve, speed));
      const double pos = std::max(rt[t], 0.0);
      const double base = penalty.cover_da ? std::max(pos, day.da_price[t]) : pos;
      up[t] = penalty.kappa_up * base + penalty.floor_up;
      op[t] = penalty.kappa_op * pos;
    }
    s.wind.push_back(std::move(g));
    s.rt_price.push_back(std::move(rt));
    s.up_price.push_back(std::move(up));
    s.op_price.push_back(std::move(op));
  }
  return s;
}

nlohmann::json to_json(const ArmaModel& m) {
  nlohmann::json j;
  j["p"] = m.p;
  j["q"] = m.q;
  j["ar"] = m.ar;
  j["ma"] = m.ma;
  j["intercept"] = m.intercept;
  j["residuals"]["kind"] = kind_name(m.residuals.kind);
  if (m.residuals.kind == ResidualDistribution::Kind::Empirical) {
    j["residuals"]["sample"] = m.residuals.sample;
  } else {
    j["residuals"]["mean"] = m.residuals.mean;
    j["residuals"]["stddev"] = m.residuals.stddev;
  }
  return j;
}

ArmaModel arma_from_json(const nlohmann::json& j) {
  try {
    ArmaModel m;
    m.p = j.at("p").get<int>();
    m.q = j.at("q").get<int>();
    m.ar = j.at("ar").get<std::vector<double>>();
    m.ma = j.at("ma").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    const auto& r = j.at("residuals");
    const auto kind = r.at("kind").get<std::string>();
    if (kind == "empirical") {
      m.residuals.kind = ResidualDistribution::Kind::Empirical;
      m.residuals.sample = r.at("sample").get<std::vector<double>>();
    } else if (kind == "gaussian") {
      m.residuals.kind = ResidualDistribution::Kind::Gaussian;
      m.residuals.mean = r.at("mean").get<double>();
      m.residuals.stddev = r.at("stddev").get<double>();
    } else {
      throw SchemaError("unknown residual distribution kind '" + kind + "'");
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed ARMA model: ") + e.what());
  }
}

nlohmann::json to_json(const PowerCurve& c) {
  return {{"cut_in", c.cut_in}, {"rated_speed", c.rated_speed}, {"cut_out", c.cut_out}, {"rated_power", c.rated_power}};
}

PowerCurve power_curve_from_json(const nlohmann::json& j) {
  try {
    PowerCurve c{j.at("cut_in").get<double>(), j.at("rated_speed").get<double>(), j.at("cut_out").get<double>(),
                 j.at("rated_power").get<double>()};
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed power curve: ") + e.what());
  }
}

nlohmann::json to_json(const NoiseModels& m) {
  return {{"format", "windbid.noise_models"},
          {"version", kNoiseModelVersion},
          {"price", to_json(m.price)},
          {"wind", to_json(m.wind)},
          {"power_curve", to_json(m.curve)}};
}

NoiseModels noise_models_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "windbid.noise_models")
    throw SchemaError("not a noise model document");
  if (j.value("version", 0) != kNoiseModelVersion)
    throw SchemaError("unsupported noise model version " + std::to_string(j.value("version", 0)));
  return NoiseModels{arma_from_json(j.at("price")), arma_from_json(j.at("wind")),
                     power_curve_from_json(j.at("power_curve"))};
}

}  // namespace windbid
