#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"

#include "windbid/dataset.hpp"
#include "windbid/market.hpp"
#include "windbid/scenario.hpp"

namespace windbid {

// Feature vector of length 3T+5: [DA price (T), wind forecast (T), RT price
// forecast (T), e_init, e_final, e_max, eta_ch, eta_dis], scaled.
using Observation = std::vector<double>;
// Fraction of the wind forecast committed day-ahead, per hour.
using Action = std::vector<double>;

inline constexpr double kPriceScale = 100.0;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct EpisodeConfig {
  int n_scenarios = 10;
  Range e_max_factor{0.25, 2.0};  // x (mean hourly forecast energy * 4)
  double e_min = 0.0;
  Range e_init_fraction{0.0, 1.0};   // position in [e_min, e_max]
  Range e_final_fraction{0.0, 1.0};  // position in [e_min, e_init]
  Range p_max_factor{0.1, 0.5};      // x rated power, shared by charge and discharge
  Range eta_ch{0.85, 1.0};
  Range eta_dis{0.85, 1.0};
  PenaltyConfig penalty;

  void validate() const;
};

struct EpisodeState {
  MarketDay day;
  BatteryContext battery;
  ScenarioSet scenarios;
  std::uint64_t seed = 0;
  int day_index = -1;
  double wind_scale = 1.0;  // divisor for wind features (rated power)
};

struct StepResult {
  double reward = 0.0;
  bool done = true;
  bool degenerate = false;  // normalizer was ~0; reward forced to 0
  BidVector bid;
  double objective = 0.0;
  double normalizer = 0.0;
};

Observation make_observation(const EpisodeState& state);

// bid_t = clip(a_t, 0, 1) * forecast G_t
BidVector action_to_bid(const MarketDay& day, const Action& action);

// (1/|Omega|) sum_w sum_t G_{t,w} max(DA_t, RT_{t,w})
double reward_normalizer(const MarketDay& day, const ScenarioSet& scenarios);

// Draws a day uniformly from the data, a battery from the configured ranges
// and a scenario set. Throws DataExhausted when the data holds no full day.
EpisodeState reset(const EpisodeConfig& config, const DataSet& data, const NoiseModels& models, std::uint64_t seed);

// Builds the day's forecasts from recorded values (RT price, wind speed and its
// power-curve image).
MarketDay market_day_from_data(const DataSet& data, int day_index, const PowerCurve& curve);

BatteryContext sample_battery(const EpisodeConfig& config, const MarketDay& day, const PowerCurve& curve,
                              std::uint64_t seed);

StepResult step(const EpisodeState& state, const Action& action, const MarketOptions& options = {});

// Source of fresh episodes keyed by seed; lets tests and training plug in
// hand-built environments.
using EpisodeSampler = std::function<EpisodeState(std::uint64_t seed)>;

EpisodeSampler data_sampler(const EpisodeConfig& config, const DataSet& data, const NoiseModels& models);

// Stateful one-step wrapper used by the training loop.
class Environment {
 public:
  Environment(EpisodeSampler sampler, MarketOptions options = {});

  const Observation& reset(std::uint64_t seed);
  StepResult step(const Action& action);
  const EpisodeState& state() const { return state_; }
  int observation_size() const;
  int action_size() const;
  const MarketOptions& market_options() const { return options_; }

 private:
  EpisodeSampler sampler_;
  MarketOptions options_;
  EpisodeState state_;
  Observation obs_;
  bool ready_ = false;
};

nlohmann::json to_json(const EpisodeState& state);
EpisodeState episode_from_json(const nlohmann::json& j);

}  // namespace windbid
