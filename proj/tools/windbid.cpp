// windbid: fit noise models, train and evaluate day-ahead bidding agents.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"

#include "windbid/errors.hpp"
#include "windbid/pipeline.hpp"
#include "windbid/text.hpp"

using namespace windbid;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kSolver = 4;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> scenarios;
  std::string out_dir = "out";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value configuration file");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--threads", c.threads, "worker thread cap")->check(CLI::PositiveNumber);
  sub->add_option("--scenarios", c.scenarios, "scenarios per episode")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", c.out_dir, "output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.scenarios) cfg.episode.n_scenarios = *c.scenarios;
  cfg.validate();
  std::filesystem::create_directories(c.out_dir);
  return cfg;
}

NoiseModels models_for(const std::string& path, const DataSet& data, const RunConfig& cfg) {
  if (!path.empty()) return load_noise_models(path);
  std::vector<std::string> warnings;
  auto m = fit_noise_models(data, cfg, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return m;
}

void print_summary(const std::vector<EvalRecord>& records) {
  std::printf("%-12s %8s %7s %9s %10s %12s %9s %9s\n", "policy", "episodes", "failed", "excluded", "mean_ratio",
              "median_ratio", "share>=95", "share<85");
  for (const auto& s : summarize(records))
    std::printf("%-12s %8ld %7ld %9ld %10.4f %12.4f %9.3f %9.3f\n", s.policy.c_str(), s.episodes, s.failed,
                s.excluded, s.mean_ratio, s.median_ratio, s.share_within_95, s.share_below_85);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead bidding for a wind farm with storage"};
  app.require_subcommand(1);

  Common common;
  std::string models_path, agent_path, short_agent_path, episode_path, name = "agent";
  std::optional<long> steps;
  std::optional<int> episodes, day_index;
  int synth_days = 200;

  auto* synth = app.add_subcommand("synth", "write synthetic prices.csv and wind.csv");
  add_common(synth, common);
  synth->add_option("--days", synth_days, "number of days")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit-noise", "fit the price and wind noise models");
  add_common(fit, common);

  auto* train_cmd = app.add_subcommand("train", "train an agent and write a checkpoint");
  add_common(train_cmd, common);
  train_cmd->add_option("--steps", steps, "training steps (episodes)");
  train_cmd->add_option("--models", models_path, "noise models from fit-noise (fitted afresh if absent)");
  train_cmd->add_option("--name", name, "checkpoint base name");

  auto* eval_cmd = app.add_subcommand("evaluate", "compare agents and the benchmark against the full SP");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--models", models_path, "noise models from fit-noise");
  eval_cmd->add_option("--agent", agent_path, "trained agent checkpoint")->required();
  eval_cmd->add_option("--short-agent", short_agent_path, "briefly trained agent checkpoint");

  auto* bench_cmd = app.add_subcommand("bench", "evaluate the non-learned strategies only");
  add_common(bench_cmd, common);
  bench_cmd->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--models", models_path, "noise models from fit-noise");

  auto* solve_cmd = app.add_subcommand("solve-day", "solve one day's stochastic program");
  add_common(solve_cmd, common);
  solve_cmd->add_option("--episode", episode_path, "episode JSON (day, battery, scenarios)");
  solve_cmd->add_option("--day", day_index, "day of the data set (scenarios drawn with --seed)");
  solve_cmd->add_option("--models", models_path, "noise models from fit-noise");
  solve_cmd->get_option("--episode")->excludes("--day");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const RunConfig cfg = resolve(common);
    const std::string& out = common.out_dir;

    if (*synth) {
      const auto data = synth_data(synth_days, cfg.data.synth_seed);
      const std::string p = out + "/prices.csv", w = out + "/wind.csv";
      std::ofstream ps(p), ws(w);
      write_prices_csv(data, ps);
      write_wind_csv(data, ws);
      ps.close();
      ws.close();
      write_manifest(out + "/manifest-synth.json", "synth", cfg, {{"synth", cfg.data.synth_seed}}, {p, w});
      std::cout << "wrote " << data.days() << " days to " << p << " and " << w << '\n';
      return 0;
    }

    if (*solve_cmd) {
      EpisodeState s;
      if (!episode_path.empty()) {
        std::ifstream in(episode_path);
        if (!in) throw DataError("cannot open " + episode_path);
        try {
          s = episode_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
          throw SchemaError(episode_path + ": " + e.what());
        }
      } else {
        if (!day_index) {
          std::cerr << "solve-day needs --episode or --day\n";
          return kUsage;
        }
        const auto data = load_data(cfg);
        const auto models = models_for(models_path, data, cfg);
        s.seed = cfg.seed;
        s.day_index = *day_index;
        s.day = market_day_from_data(data, *day_index, models.curve);
        s.battery = sample_battery(cfg.episode, s.day, models.curve, cfg.seed);
        s.scenarios = generate_scenarios(s.day, models.price, models.wind, models.curve, cfg.episode.n_scenarios,
                                         cfg.seed, cfg.episode.penalty);
      }
      const auto rep = solve_full_sp(s.day, s.battery, s.scenarios, market_options(cfg));
      if (!rep.optimal()) {
        std::cerr << "error: stochastic program is " << to_string(rep.status) << '\n';
        return kSolver;
      }
      std::cout << "f_sp " << format_double(rep.objective) << '\n';
      std::cout << "bid " << join(rep.first_stage.p_da) << '\n';
      return 0;
    }

    const auto data = load_data(cfg);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
    const auto seeds = run_seeds(cfg.seed);

    if (*fit) {
      std::vector<std::string> warnings;
      const auto models = fit_noise_models(data, cfg, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      const std::string path = out + "/noise_models.json";
      save_noise_models(models, path);
      write_manifest(out + "/manifest-fit-noise.json", "fit-noise", cfg, to_json(seeds), {path});
      std::cout << "price ARMA(" << models.price.p << "," << models.price.q << ") ar=[" << join(models.price.ar)
                << "] ma=[" << join(models.price.ma) << "]\n";
      std::cout << "wind ARMA(" << models.wind.p << "," << models.wind.q << ") ar=[" << join(models.wind.ar)
                << "] ma=[" << join(models.wind.ma) << "]\n";
      std::cout << "wrote " << path << '\n';
      return 0;
    }

    const auto models = models_for(models_path, data, cfg);

    if (*train_cmd) {
      const long n = steps.value_or(cfg.train.steps);
      if (n < cfg.agent.batch_size) {
        std::cerr << "error: steps (" << n << ") below batch size (" << cfg.agent.batch_size << ")\n";
        return kUsage;
      }
      const std::string ckpt = out + "/" + name + ".json", log = out + "/" + name + "_log.csv";
      const auto res = train_agent(cfg, data, models, n, ckpt);
      save_checkpoint(res.agent, ckpt);
      std::ofstream ls(log);
      write_train_log(res.log, ls);
      ls.close();
      write_manifest(out + "/manifest-train-" + name + ".json", "train", cfg, to_json(seeds), {ckpt, log});
      const auto& last = res.log.back();
      std::cout << "trained " << n << " steps; last mean reward " << format_double(last.mean_reward) << "; wrote "
                << ckpt << '\n';
      if (res.degenerate_episodes) std::cerr << "note: " << res.degenerate_episodes << " calm-day episodes\n";
      return 0;
    }

    std::vector<Policy> policies;
    std::vector<std::string> inputs;
    if (*eval_cmd) {
      policies.push_back(agent_policy("rl", std::make_shared<const Agent>(load_checkpoint(agent_path))));
      inputs.push_back(agent_path);
      if (!short_agent_path.empty()) {
        policies.push_back(agent_policy("rl_short", std::make_shared<const Agent>(load_checkpoint(short_agent_path))));
        inputs.push_back(short_agent_path);
      }
      policies.push_back(benchmark_policy());
    } else {
      policies = {benchmark_policy(), zero_policy(), full_policy()};
    }
    const int n = episodes.value_or(cfg.eval_episodes);
    const auto records = evaluate(policies, data_sampler(cfg.episode, data, models), eval_options(cfg, n));
    auto artifacts = write_eval_outputs(records, out);
    const std::string command = *eval_cmd ? "evaluate" : "bench";
    nlohmann::json seed_doc = to_json(seeds);
    for (const auto& in : inputs) seed_doc["input_sha256"][std::filesystem::path(in).filename().string()] = sha256_file(in);
    write_manifest(out + "/manifest-" + command + ".json", command, cfg, seed_doc, artifacts);
    print_summary(records);
    return 0;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ArchitectureMismatch& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
