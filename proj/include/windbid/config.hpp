#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "windbid/ddpg.hpp"
#include "windbid/environment.hpp"
#include "windbid/market.hpp"
#include "windbid/scenario.hpp"

namespace windbid {

struct DataConfig {
  std::string prices;  // empty: use synthetic data
  std::string wind;
  int synth_days = 200;
  std::uint64_t synth_seed = 1;
};

struct NoiseFitConfig {
  int price_p = 5;
  int price_q = 2;
  int wind_p = 3;
  int wind_q = 0;
  ResidualDistribution::Kind residuals = ResidualDistribution::Kind::Empirical;
};

struct TrainConfig {
  long steps = 500000;
  long short_steps = 10000;  // the under-trained comparison agent
  long log_interval = 1000;
  long checkpoint_interval = 10000;
};

// Every tunable of a run. Serialised as flat "module.key = value" lines.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  DataConfig data;
  MarketOptions market;
  NoiseFitConfig fit;
  PowerCurve curve;
  EpisodeConfig episode;  // n_scenarios = 10 gives p_w = 0.1
  AgentConfig agent;
  TrainConfig train;
  int eval_episodes = 2000;

  void validate() const;
};

// Applies "key = value" lines on top of the defaults. '#' starts a comment.
// Unknown keys and unparsable values raise ConfigError naming the line.
RunConfig parse_config(std::istream& in, const std::string& name = "config");
RunConfig load_config(const std::string& path);

void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
// Resolved key/value pairs in a fixed order; feeding them back to
// parse_config reproduces the configuration exactly.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
void write_config(const RunConfig& config, std::ostream& out);

std::string sha256_file(const std::string& path);

// manifest.json: command, resolved config, seeds and SHA-256 of each artifact.
void write_manifest(const std::string& path, const std::string& command, const RunConfig& config,
                    const nlohmann::json& seeds, const std::vector<std::string>& artifacts);

}  // namespace windbid
