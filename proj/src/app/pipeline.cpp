#include "windbid/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "windbid/errors.hpp"
#include "windbid/rng.hpp"

namespace windbid {

namespace {

enum Stream : std::uint64_t { kTrainEnv = 101, kAgent = 102, kEval = 103 };

// Removes each hour-of-day mean. Scenario noise perturbs a forecast that
// already carries the daily shape, so the models describe what is left.
std::vector<double> deseasonalize(std::vector<double> v) {
  constexpr int h = DataSet::kHoursPerDay;
  std::vector<double> mean(h, 0.0);
  std::vector<int> count(h, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    mean[i % h] += v[i];
    ++count[i % h];
  }
  for (int k = 0; k < h; ++k)
    if (count[k]) mean[k] /= count[k];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= mean[i % h];
  return v;
}

}  // namespace

RunSeeds run_seeds(std::uint64_t seed) {
  return {derive_seed(seed, kTrainEnv), derive_seed(seed, kAgent), derive_seed(seed, kEval)};
}

nlohmann::json to_json(const RunSeeds& s) {
  return {{"train_env", s.train_env}, {"agent", s.agent}, {"eval", s.eval}};
}

DataSet load_data(const RunConfig& config) {
  if (config.data.prices.empty()) return synth_data(config.data.synth_days, config.data.synth_seed);
  return ingest(config.data.prices, config.data.wind);
}

NoiseModels fit_noise_models(const DataSet& data, const RunConfig& config, std::vector<std::string>* warnings) {
  FitOptions opt;
  opt.residual_kind = config.fit.residuals;
  NoiseModels m;
  const auto rt = deseasonalize(data.rt_series());
  const auto wind = deseasonalize(data.wind_series());
  m.price = fit_arma(rt, config.fit.price_p, config.fit.price_q, opt);
  m.wind = fit_arma(wind, config.fit.wind_p, config.fit.wind_q, opt);
  m.curve = config.curve;
  if (warnings) {
    if (!is_stationary(m.price)) warnings->push_back("fitted price model is not stationary");
    if (!is_stationary(m.wind)) warnings->push_back("fitted wind model is not stationary");
  }
  return m;
}

NoiseModels load_noise_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open noise models " + path);
  try {
    return noise_models_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_noise_models(const NoiseModels& models, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json(models).dump(1) << '\n';
}

MarketOptions market_options(const RunConfig& config) {
  MarketOptions o = config.market;
  o.threads = config.threads;
  return o;
}

TrainResult train_agent(const RunConfig& config, const DataSet& data, const NoiseModels& models, long steps,
                        const std::string& checkpoint_path) {
  const RunSeeds seeds = run_seeds(config.seed);
  Environment env(data_sampler(config.episode, data, models), market_options(config));
  AgentConfig agent = config.agent;
  agent.seed = seeds.agent;
  TrainOptions opt;
  opt.n_steps = steps;
  opt.log_interval = config.train.log_interval;
  opt.checkpoint_interval = checkpoint_path.empty() ? 0 : config.train.checkpoint_interval;
  opt.checkpoint_path = checkpoint_path;
  opt.env_seed = seeds.train_env;
  return train(env, agent, opt);
}

EvalOptions eval_options(const RunConfig& config, int n_episodes) {
  EvalOptions o;
  o.n_episodes = n_episodes;
  o.seed = run_seeds(config.seed).eval;
  o.threads = config.threads;
  o.market = config.market;
  return o;
}

std::vector<std::string> write_eval_outputs(const std::vector<EvalRecord>& records, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto summary = summarize(records);
  const std::vector<std::string> paths{dir + "/eval_records.csv", dir + "/summary.csv", dir + "/histogram.csv"};
  std::ofstream rec(paths[0]), sum(paths[1]), hist(paths[2]);
  if (!rec || !sum || !hist) throw DataError("cannot write evaluation outputs to " + dir);
  write_records_csv(records, rec);
  write_summary_csv(summary, sum);
  write_histogram_csv(summary, hist);
  return paths;
}

}  // namespace windbid
