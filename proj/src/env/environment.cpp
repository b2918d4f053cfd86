#include "windbid/environment.hpp"

#include <algorithm>
#include <cmath>

#include "windbid/errors.hpp"
#include "windbid/rng.hpp"

namespace windbid {

namespace {

constexpr double kDegenerateNormalizer = 1e-9;

enum Stream : std::uint64_t { kDayStream = 1, kBatteryStream = 2, kScenarioStream = 3 };

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw ConfigError(std::string("episode range '") + name + "' needs lo <= hi");
}

nlohmann::json matrix_json(const std::vector<std::vector<double>>& m) { return m; }

}  // namespace

void EpisodeConfig::validate() const {
  if (n_scenarios < 1) throw ConfigError("episode scenario count must be >= 1");
  check_range(e_max_factor, "e_max_factor");
  check_range(e_init_fraction, "e_init_fraction");
  check_range(e_final_fraction, "e_final_fraction");
  check_range(p_max_factor, "p_max_factor");
  check_range(eta_ch, "eta_ch");
  check_range(eta_dis, "eta_dis");
  if (e_max_factor.lo < 0.0 || p_max_factor.lo < 0.0 || e_min < 0.0)
    throw ConfigError("battery size ranges must be nonnegative");
  if (e_init_fraction.lo < 0.0 || e_init_fraction.hi > 1.0 || e_final_fraction.lo < 0.0 || e_final_fraction.hi > 1.0)
    throw ConfigError("energy fractions must lie in [0, 1]");
  if (eta_ch.lo <= 0.0 || eta_ch.hi > 1.0 || eta_dis.lo <= 0.0) throw ConfigError("efficiency ranges out of bounds");
}

Observation make_observation(const EpisodeState& s) {
  const auto& d = s.day;
  const int horizon = d.horizon();
  Observation obs;
  obs.reserve(static_cast<std::size_t>(3 * horizon + 5));
  for (double v : d.da_price) obs.push_back(v / kPriceScale);
  for (double v : d.wind_forecast) obs.push_back(v / s.wind_scale);
  for (double v : d.rt_price_forecast) obs.push_back(v / kPriceScale);
  const auto& b = s.battery;
  const double e_scale = b.e_max > 0.0 ? 1.0 / b.e_max : 0.0;
  obs.push_back(b.e_init * e_scale);
  obs.push_back(b.e_final * e_scale);
  obs.push_back(b.e_max * e_scale);
  obs.push_back(b.eta_ch);
  obs.push_back(b.eta_dis);
  for (double v : obs)
    if (!std::isfinite(v)) throw DataError("observation has non-finite entries");
  return obs;
}

BidVector action_to_bid(const MarketDay& day, const Action& action) {
  if (static_cast<int>(action.size()) != day.horizon()) throw DimensionMismatch("action length disagrees with horizon");
  BidVector bid;
  bid.p_da.reserve(action.size());
  for (std::size_t t = 0; t < action.size(); ++t) {
    const double a = std::isfinite(action[t]) ? std::clamp(action[t], 0.0, 1.0) : 0.0;
    bid.p_da.push_back(a * day.wind_forecast[t]);
  }
  return bid;
}

double reward_normalizer(const MarketDay& day, const ScenarioSet& scenarios) {
  double total = 0.0;
  for (int w = 0; w < scenarios.size(); ++w)
    for (int t = 0; t < day.horizon(); ++t)
      total += scenarios.wind[w][t] * std::max(day.da_price[t], scenarios.rt_price[w][t]);
  return total / scenarios.size();
}

MarketDay market_day_from_data(const DataSet& data, int day_index, const PowerCurve& curve) {
  const auto recs = data.day(day_index);
  MarketDay day;
  for (const auto& r : recs) {
    day.da_price.push_back(r.da_price);
    day.rt_price_forecast.push_back(r.rt_price);
    day.wind_speed_forecast.push_back(r.wind_speed);
    day.wind_forecast.push_back(speed_to_power(curve, r.wind_speed));
  }
  return day;
}

BatteryContext sample_battery(const EpisodeConfig& config, const MarketDay& day, const PowerCurve& curve,
                              std::uint64_t seed) {
  auto rng = make_rng(seed);
  double mean_energy = 0.0;
  for (double g : day.wind_forecast) mean_energy += g;
  mean_energy /= day.horizon();

  BatteryContext b;
  b.e_min = config.e_min;
  b.e_max = std::max(b.e_min, draw(rng, config.e_max_factor) * mean_energy * 4.0);
  b.e_init = b.e_min + draw(rng, config.e_init_fraction) * (b.e_max - b.e_min);
  b.e_final = b.e_min + draw(rng, config.e_final_fraction) * (b.e_init - b.e_min);
  b.p_ch_max = draw(rng, config.p_max_factor) * curve.rated_power;
  b.p_dis_max = b.p_ch_max;
  b.eta_ch = draw(rng, config.eta_ch);
  b.eta_dis = draw(rng, config.eta_dis);
  return b;
}

EpisodeState reset(const EpisodeConfig& config, const DataSet& data, const NoiseModels& models, std::uint64_t seed) {
  config.validate();
  if (data.days() < 1) throw DataExhausted("data set holds no complete day");
  EpisodeState s;
  s.seed = seed;
  auto day_rng = make_rng(derive_seed(seed, kDayStream));
  s.day_index = std::uniform_int_distribution<int>(0, data.days() - 1)(day_rng);
  s.day = market_day_from_data(data, s.day_index, models.curve);
  s.battery = sample_battery(config, s.day, models.curve, derive_seed(seed, kBatteryStream));
  s.scenarios = generate_scenarios(s.day, models.price, models.wind, models.curve, config.n_scenarios,
                                   derive_seed(seed, kScenarioStream), config.penalty);
  s.wind_scale = models.curve.rated_power;
  return s;
}

StepResult step(const EpisodeState& state, const Action& action, const MarketOptions& options) {
  StepResult r;
  r.bid = action_to_bid(state.day, action);
  r.normalizer = reward_normalizer(state.day, state.scenarios);
  if (r.normalizer <= kDegenerateNormalizer) {
    r.degenerate = true;
    r.reward = 0.0;
    return r;
  }
  const SolveReport rep = solve_second_stage(state.day, state.battery, state.scenarios, r.bid, options);
  if (!rep.optimal())
    throw SolverError(std::string("second-stage solve ended ") + to_string(rep.status) +
                      (rep.failed_scenario >= 0 ? " in scenario " + std::to_string(rep.failed_scenario) : ""));
  r.objective = rep.objective;
  r.reward = rep.objective / r.normalizer;
  return r;
}

EpisodeSampler data_sampler(const EpisodeConfig& config, const DataSet& data, const NoiseModels& models) {
  return [config, &data, models](std::uint64_t seed) { return reset(config, data, models, seed); };
}

Environment::Environment(EpisodeSampler sampler, MarketOptions options)
    : sampler_(std::move(sampler)), options_(std::move(options)) {}

const Observation& Environment::reset(std::uint64_t seed) {
  state_ = sampler_(seed);
  obs_ = make_observation(state_);
  ready_ = true;
  return obs_;
}

StepResult Environment::step(const Action& action) {
  if (!ready_) throw Error("environment stepped before reset");
  ready_ = false;  // one step per episode
  return windbid::step(state_, action, options_);
}

int Environment::observation_size() const {
  if (obs_.empty()) throw Error("observation size unknown before the first reset");
  return static_cast<int>(obs_.size());
}

int Environment::action_size() const {
  if (obs_.empty()) throw Error("action size unknown before the first reset");
  return state_.day.horizon();
}

nlohmann::json to_json(const EpisodeState& s) {
  nlohmann::json j;
  j["format"] = "windbid.episode";
  j["version"] = 1;
  j["seed"] = s.seed;
  j["day_index"] = s.day_index;
  j["wind_scale"] = s.wind_scale;
  j["day"] = {{"da_price", s.day.da_price},
              {"rt_price_forecast", s.day.rt_price_forecast},
              {"wind_forecast", s.day.wind_forecast},
              {"wind_speed_forecast", s.day.wind_speed_forecast}};
  const auto& b = s.battery;
  j["battery"] = {{"e_min", b.e_min},   {"e_max", b.e_max},         {"e_init", b.e_init},
                  {"e_final", b.e_final}, {"p_ch_max", b.p_ch_max}, {"p_dis_max", b.p_dis_max},
                  {"eta_ch", b.eta_ch},   {"eta_dis", b.eta_dis}};
  const auto& sc = s.scenarios;
  j["scenarios"] = {{"prob", sc.prob},
                    {"wind", matrix_json(sc.wind)},
                    {"rt_price", matrix_json(sc.rt_price)},
                    {"up_price", matrix_json(sc.up_price)},
                    {"op_price", matrix_json(sc.op_price)}};
  return j;
}

EpisodeState episode_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "windbid.episode") throw SchemaError("not an episode document");
    if (j.value("version", 0) != 1) throw SchemaError("unsupported episode version");
    EpisodeState s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.day_index = j.value("day_index", -1);
    s.wind_scale = j.value("wind_scale", 1.0);
    const auto& d = j.at("day");
    s.day.da_price = d.at("da_price").get<std::vector<double>>();
    s.day.rt_price_forecast = d.at("rt_price_forecast").get<std::vector<double>>();
    s.day.wind_forecast = d.at("wind_forecast").get<std::vector<double>>();
    s.day.wind_speed_forecast = d.value("wind_speed_forecast", std::vector<double>{});
    const auto& b = j.at("battery");
    s.battery = BatteryContext{b.at("e_min").get<double>(),    b.at("e_max").get<double>(),
                               b.at("e_init").get<double>(),   b.at("e_final").get<double>(),
                               b.at("p_ch_max").get<double>(), b.at("p_dis_max").get<double>(),
                               b.at("eta_ch").get<double>(),   b.at("eta_dis").get<double>()};
    const auto& sc = j.at("scenarios");
    using Matrix = std::vector<std::vector<double>>;
    s.scenarios.prob = sc.at("prob").get<std::vector<double>>();
    s.scenarios.wind = sc.at("wind").get<Matrix>();
    s.scenarios.rt_price = sc.at("rt_price").get<Matrix>();
    s.scenarios.up_price = sc.at("up_price").get<Matrix>();
    s.scenarios.op_price = sc.at("op_price").get<Matrix>();
    s.day.validate();
    s.battery.validate();
    s.scenarios.validate(s.day.horizon());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed episode: ") + e.what());
  }
}

}  // namespace windbid
