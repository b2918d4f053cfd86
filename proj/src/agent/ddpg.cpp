#include "windbid/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "windbid/errors.hpp"
#include "windbid/rng.hpp"
#include "windbid/text.hpp"

namespace windbid {

namespace {

enum Stream : std::uint64_t { kActorInit = 1, kCriticInit = 2, kAgentNoise = 3 };

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

void guard(const Agent& a) {
  if (!a.actor.finite() || !a.critic.finite()) throw NumericalFailure("non-finite network parameters during training");
}

}  // namespace

void AgentConfig::validate() const {
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ConfigError("learning rates must be nonnegative");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("soft-update rate must lie in (0, 1]");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (buffer_capacity < batch_size) throw ConfigError("replay capacity must hold at least one batch");
  if (!(noise_sigma >= 0.0) || !(noise_decay >= 0.0 && noise_decay <= 1.0))
    throw ConfigError("noise sigma must be >= 0 and decay in [0, 1]");
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden layer widths must be positive");
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"tau", c.tau},
          {"batch_size", c.batch_size},
          {"buffer_capacity", c.buffer_capacity},
          {"noise_sigma", c.noise_sigma},
          {"noise_decay", c.noise_decay},
          {"hidden", c.hidden},
          {"target_networks", c.target_networks},
          {"seed", c.seed}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig c;
  c.actor_lr = j.at("actor_lr").get<double>();
  c.critic_lr = j.at("critic_lr").get<double>();
  c.tau = j.at("tau").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.buffer_capacity = j.at("buffer_capacity").get<int>();
  c.noise_sigma = j.at("noise_sigma").get<double>();
  c.noise_decay = j.at("noise_decay").get<double>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.target_networks = j.at("target_networks").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be positive");
  slots_.reserve(static_cast<std::size_t>(std::min(capacity, 1 << 16)));
}

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    slots_.push_back(std::move(t));
    return;
  }
  slots_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(int i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("replay index out of range");
  return slots_[(head_ + i) % size()];
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, std::mt19937_64& rng) const {
  if (batch < 1 || size() < batch) throw Error("replay buffer holds fewer transitions than one batch");
  std::uniform_int_distribution<int> pick(0, size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (int k = 0; k < batch; ++k) out.push_back(&slots_[pick(rng)]);
  return out;
}

Agent make_agent(const AgentConfig& config, int obs_size, int action_size) {
  config.validate();
  Agent a;
  a.config = config;
  a.actor = Mlp(layer_sizes(obs_size, config.hidden, action_size), Activation::Relu, Activation::Logistic);
  a.critic = Mlp(layer_sizes(obs_size + action_size, config.hidden, 1), Activation::Relu, Activation::Identity);
  auto actor_rng = make_rng(derive_seed(config.seed, kActorInit));
  auto critic_rng = make_rng(derive_seed(config.seed, kCriticInit));
  a.actor.init(actor_rng);
  a.critic.init(critic_rng);
  if (config.target_networks) {
    a.actor_target = a.actor;
    a.critic_target = a.critic;
  }
  a.rng = make_rng(derive_seed(config.seed, kAgentNoise));
  a.sigma = config.noise_sigma;
  return a;
}

Action act_with_noise(Agent& agent, const Observation& obs, double sigma) {
  Action a = actor_forward(agent.actor, obs);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& v : a) v = std::clamp(v + noise(agent.rng), 0.0, 1.0);
  }
  return a;
}

TrainDiagnostics train_step(Agent& agent, const ReplayBuffer& buffer) {
  const int batch = agent.config.batch_size;
  const auto picks = buffer.sample(batch, agent.rng);
  const int n_obs = agent.actor.input_size();
  const int n_act = agent.actor.output_size();

  Eigen::MatrixXd obs(n_obs, batch), sa(n_obs + n_act, batch);
  Eigen::RowVectorXd r(batch);
  for (int k = 0; k < batch; ++k) {
    const auto& t = *picks[k];
    if (static_cast<int>(t.obs.size()) != n_obs || static_cast<int>(t.action.size()) != n_act)
      throw DimensionMismatch("stored transition does not match the agent's networks");
    for (int i = 0; i < n_obs; ++i) obs(i, k) = sa(i, k) = t.obs[i];
    for (int i = 0; i < n_act; ++i) sa(n_obs + i, k) = t.action[i];
    r(k) = t.reward;
  }

  TrainDiagnostics d;
  // Critic: minimise mean (Q(s,a) - r)^2.
  {
    Tape tape;
    const Eigen::MatrixXd q = forward(agent.critic, sa, &tape);
    const Eigen::RowVectorXd err = q.row(0) - r;
    d.critic_loss = err.squaredNorm() / batch;
    const Gradients g = backprop_grads(agent.critic, tape, (2.0 / batch) * err);
    agent.critic_opt.step(agent.critic, g, agent.config.critic_lr);
  }
  // Actor: maximise mean Q(s, actor(s)) by descending on its negative.
  {
    Tape actor_tape, critic_tape;
    const Eigen::MatrixXd act = forward(agent.actor, obs, &actor_tape);
    Eigen::MatrixXd x(n_obs + n_act, batch);
    x << obs, act;
    const Eigen::MatrixXd q = forward(agent.critic, x, &critic_tape);
    d.actor_objective = q.mean();
    const Eigen::MatrixXd up = Eigen::MatrixXd::Constant(1, batch, -1.0 / batch);
    const Gradients through = backprop_grads(agent.critic, critic_tape, up);
    const Gradients g = backprop_grads(agent.actor, actor_tape, through.input.bottomRows(n_act));
    agent.actor_opt.step(agent.actor, g, agent.config.actor_lr);
  }
  if (agent.config.target_networks) {
    soft_update(agent.actor_target, agent.actor, agent.config.tau);
    soft_update(agent.critic_target, agent.critic, agent.config.tau);
  }
  guard(agent);
  return d;
}

TrainResult train(Environment& env, const AgentConfig& config, const TrainOptions& options) {
  config.validate();
  if (options.n_steps < config.batch_size)
    throw ConfigError("training steps (" + std::to_string(options.n_steps) + ") below batch size (" +
                      std::to_string(config.batch_size) + ")");
  if (options.log_interval < 1) throw ConfigError("log interval must be positive");

  TrainResult out;
  Observation obs = env.reset(derive_seed(options.env_seed, 0));
  out.agent = make_agent(config, env.observation_size(), env.action_size());
  Agent& agent = out.agent;
  ReplayBuffer buffer(config.buffer_capacity);

  double reward_sum = 0.0, loss_sum = 0.0, objective_sum = 0.0;
  long episodes = 0, updates = 0;
  for (long step = 1; step <= options.n_steps; ++step) {
    if (step > 1) obs = env.reset(derive_seed(options.env_seed, static_cast<std::uint64_t>(step - 1)));
    Action action = act_with_noise(agent, obs, agent.sigma);
    const StepResult res = env.step(action);
    if (res.degenerate) ++out.degenerate_episodes;
    buffer.push({std::move(obs), std::move(action), res.reward});
    agent.sigma *= config.noise_decay;
    ++agent.episodes;
    reward_sum += res.reward;
    ++episodes;

    if (buffer.size() >= config.batch_size) {
      const auto d = train_step(agent, buffer);
      loss_sum += d.critic_loss;
      objective_sum += d.actor_objective;
      ++updates;
    }
    if (step % options.log_interval == 0 || step == options.n_steps) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.log.push_back({step, reward_sum / episodes, updates ? loss_sum / updates : nan,
                         updates ? objective_sum / updates : nan});
      reward_sum = loss_sum = objective_sum = 0.0;
      episodes = updates = 0;
    }
    if (options.checkpoint_interval > 0 && step % options.checkpoint_interval == 0 && !options.checkpoint_path.empty())
      save_checkpoint(agent, options.checkpoint_path);
  }
  return out;
}

void write_train_log(const std::vector<TrainLogRow>& log, std::ostream& out) {
  out << "step,mean_reward,critic_loss,actor_objective\n";
  for (const auto& row : log)
    out << row.step << ',' << format_double(row.mean_reward) << ',' << format_double(row.critic_loss) << ','
        << format_double(row.actor_objective) << '\n';
}

nlohmann::json to_json(const Agent& agent) {
  nlohmann::json j;
  j["format"] = "windbid.agent";
  j["version"] = 1;
  j["config"] = to_json(agent.config);
  j["episodes"] = agent.episodes;
  j["sigma"] = agent.sigma;
  j["actor"] = to_json(agent.actor);
  j["critic"] = to_json(agent.critic);
  if (agent.config.target_networks) {
    j["actor_target"] = to_json(agent.actor_target);
    j["critic_target"] = to_json(agent.critic_target);
  }
  return j;
}

Agent agent_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "windbid.agent") throw SchemaError("not an agent checkpoint");
    if (j.value("version", 0) != 1) throw SchemaError("unsupported checkpoint version");
    const AgentConfig config = agent_config_from_json(j.at("config"));
    Mlp actor = mlp_from_json(j.at("actor"));
    Mlp critic = mlp_from_json(j.at("critic"));
    Agent a = make_agent(config, actor.input_size(), actor.output_size());
    if (!a.actor.same_shape(actor) || !a.critic.same_shape(critic))
      throw ArchitectureMismatch("checkpoint networks disagree with the stored configuration");
    a.actor = std::move(actor);
    a.critic = std::move(critic);
    if (config.target_networks) {
      a.actor_target = mlp_from_json(j.at("actor_target"));
      a.critic_target = mlp_from_json(j.at("critic_target"));
    }
    a.episodes = j.at("episodes").get<long>();
    a.sigma = j.at("sigma").get<double>();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Agent& agent, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << to_json(agent).dump(1) << '\n';
}

Agent load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path);
  try {
    return agent_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
}

}  // namespace windbid
