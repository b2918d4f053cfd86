#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "windbid/environment.hpp"
#include "windbid/mlp.hpp"

namespace windbid {

struct AgentConfig {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  int batch_size = 64;
  int buffer_capacity = 100000;
  double noise_sigma = 0.2;
  double noise_decay = 0.999;  // per episode
  std::vector<int> hidden{16, 16, 16};
  bool target_networks = false;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const AgentConfig& c);
AgentConfig agent_config_from_json(const nlohmann::json& j);

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(Transition t);
  int size() const { return static_cast<int>(slots_.size()); }
  int capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition.
  const Transition& at(int i) const;
  // Uniform draws with replacement; needs size() >= batch.
  std::vector<const Transition*> sample(int batch, std::mt19937_64& rng) const;

 private:
  int capacity_;
  int head_ = 0;  // slot the next push overwrites once full
  std::vector<Transition> slots_;
};

struct Agent {
  AgentConfig config;
  Mlp actor;   // obs -> [0,1]^T
  Mlp critic;  // (obs, action) -> Q
  Mlp actor_target, critic_target;  // maintained only with config.target_networks
  Adam actor_opt, critic_opt;
  std::mt19937_64 rng;
  double sigma = 0.0;  // current exploration noise
  long episodes = 0;
};

Agent make_agent(const AgentConfig& config, int obs_size, int action_size);

// Actor output plus N(0, sigma^2) noise per component, clipped to [0,1].
Action act_with_noise(Agent& agent, const Observation& obs, double sigma);

struct TrainDiagnostics {
  double critic_loss = 0.0;     // mean (Q(s,a) - r)^2 before the update
  double actor_objective = 0.0;  // mean Q(s, actor(s)) before the update
};

// One critic and one actor update on a sampled batch. Episodes last one step,
// so the critic target is the reward itself.
TrainDiagnostics train_step(Agent& agent, const ReplayBuffer& buffer);

struct TrainLogRow {
  long step = 0;
  double mean_reward = 0.0;  // over episodes since the previous row
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

struct TrainOptions {
  long n_steps = 500000;
  long log_interval = 1000;
  long checkpoint_interval = 0;  // 0 disables
  std::string checkpoint_path;
  std::uint64_t env_seed = 0;    // episode k resets with derive_seed(env_seed, k)
};

struct TrainResult {
  Agent agent;
  std::vector<TrainLogRow> log;
  long degenerate_episodes = 0;
};

TrainResult train(Environment& env, const AgentConfig& config, const TrainOptions& options);

void write_train_log(const std::vector<TrainLogRow>& log, std::ostream& out);

nlohmann::json to_json(const Agent& agent);
Agent agent_from_json(const nlohmann::json& j);
void save_checkpoint(const Agent& agent, const std::string& path);
Agent load_checkpoint(const std::string& path);

}  // namespace windbid
