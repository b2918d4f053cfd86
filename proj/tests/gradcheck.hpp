#pragma once

// Central finite differences against backprop_grads. Test-only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "windbid/mlp.hpp"

namespace gradcheck {

inline constexpr double kStep = 1e-5;

// |a - b| relative to the larger magnitude; gradients below the floor are
// compared absolutely, since their finite-difference estimate is all roundoff.
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Worst relative error over every parameter of `net` for the scalar loss().
// `analytic` holds the gradients backprop produced for the same loss.
inline double param_error(windbid::Mlp& net, const std::vector<windbid::Layer>& analytic,
                          const std::function<double()>& loss) {
  double worst = 0.0;
  auto probe = [&](double& p, double g) {
    const double saved = p;
    p = saved + kStep;
    const double up = loss();
    p = saved - kStep;
    const double down = loss();
    p = saved;
    worst = std::max(worst, rel_err(g, (up - down) / (2.0 * kStep)));
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) probe(layer.w(i, j), analytic[l].w(i, j));
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) probe(layer.b(i), analytic[l].b(i));
  }
  return worst;
}

inline double input_error(Eigen::MatrixXd& x, const Eigen::MatrixXd& analytic, const std::function<double()>& loss) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + kStep;
      const double up = loss();
      x(i, j) = saved - kStep;
      const double down = loss();
      x(i, j) = saved;
      worst = std::max(worst, rel_err(analytic(i, j), (up - down) / (2.0 * kStep)));
    }
  return worst;
}

struct Result {
  double actor = 0.0;   // actor parameters and inputs, weighted-sum loss
  double critic = 0.0;  // critic parameters and inputs, weighted-sum loss
  double chain = 0.0;   // actor parameters under mean Q(s, actor(s))
  double worst() const { return std::max({actor, critic, chain}); }
};

// Random small actor/critic pair and batch, checked on all three paths.
inline Result random_check(std::mt19937_64& rng) {
  using namespace windbid;
  std::uniform_int_distribution<int> width(2, 6);
  const int n_obs = width(rng), n_act = width(rng), batch = width(rng) - 1;
  std::vector<int> hidden(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 3)(rng)));
  for (auto& h : hidden) h = width(rng);

  auto sizes = [&](int in, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
  };
  Mlp actor(sizes(n_obs, n_act), Activation::Relu, Activation::Logistic);
  Mlp critic(sizes(n_obs + n_act, 1), Activation::Relu, Activation::Identity);
  actor.init(rng);
  critic.init(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd obs = Eigen::MatrixXd::NullaryExpr(n_obs, batch, [&] { return normal(rng); });
  Eigen::MatrixXd act = Eigen::MatrixXd::NullaryExpr(n_act, batch, [&] { return std::abs(normal(rng)) / 3; });
  const Eigen::MatrixXd weights_a = Eigen::MatrixXd::NullaryExpr(n_act, batch, [&] { return normal(rng); });
  const Eigen::MatrixXd weights_q = Eigen::MatrixXd::NullaryExpr(1, batch, [&] { return normal(rng); });

  Result res;
  {
    Tape tape;
    forward(actor, obs, &tape);
    const auto g = backprop_grads(actor, tape, weights_a);
    auto loss = [&] { return forward(actor, obs).cwiseProduct(weights_a).sum(); };
    res.actor = std::max(param_error(actor, g.layers, loss), input_error(obs, g.input, loss));
  }
  {
    Eigen::MatrixXd sa(n_obs + n_act, batch);
    sa << obs, act;
    Tape tape;
    forward(critic, sa, &tape);
    const auto g = backprop_grads(critic, tape, weights_q);
    auto loss = [&] { return forward(critic, sa).cwiseProduct(weights_q).sum(); };
    res.critic = std::max(param_error(critic, g.layers, loss), input_error(sa, g.input, loss));
  }
  {
    auto mean_q = [&] {
      Eigen::MatrixXd x(n_obs + n_act, batch);
      x << obs, forward(actor, obs);
      return forward(critic, x).mean();
    };
    Tape actor_tape, critic_tape;
    Eigen::MatrixXd x(n_obs + n_act, batch);
    x << obs, forward(actor, obs, &actor_tape);
    forward(critic, x, &critic_tape);
    const auto through = backprop_grads(critic, critic_tape, Eigen::MatrixXd::Constant(1, batch, 1.0 / batch));
    const auto g = backprop_grads(actor, actor_tape, through.input.bottomRows(n_act));
    res.chain = param_error(actor, g.layers, mean_q);
  }
  return res;
}

}  // namespace gradcheck
