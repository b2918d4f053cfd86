#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "windbid/config.hpp"
#include "windbid/dataset.hpp"
#include "windbid/eval.hpp"

namespace windbid {

// Seeds of each stage, all derived from RunConfig::seed.
struct RunSeeds {
  std::uint64_t train_env = 0;
  std::uint64_t agent = 0;
  std::uint64_t eval = 0;
};

RunSeeds run_seeds(std::uint64_t seed);
nlohmann::json to_json(const RunSeeds& seeds);

// Ingests the configured CSVs, or synthesises data when none are given.
DataSet load_data(const RunConfig& config);

// Fits the price model to the RT price series and the wind model to the
// wind-speed series, both after removing the hour-of-day mean profile.
// Non-stationary fits are reported in `warnings`.
NoiseModels fit_noise_models(const DataSet& data, const RunConfig& config, std::vector<std::string>* warnings = nullptr);

NoiseModels load_noise_models(const std::string& path);
void save_noise_models(const NoiseModels& models, const std::string& path);

MarketOptions market_options(const RunConfig& config);

// Trains with config.agent on episodes from the data; the agent seed and
// episode seeds come from run_seeds(config.seed).
TrainResult train_agent(const RunConfig& config, const DataSet& data, const NoiseModels& models, long steps,
                        const std::string& checkpoint_path = "");

EvalOptions eval_options(const RunConfig& config, int n_episodes);

// Writes eval_records.csv, summary.csv and histogram.csv into dir and returns
// their paths.
std::vector<std::string> write_eval_outputs(const std::vector<EvalRecord>& records, const std::string& dir);

}  // namespace windbid
