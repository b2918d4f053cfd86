#include "windbid/mlp.hpp"

#include <cmath>

#include "windbid/errors.hpp"

namespace windbid {

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Logistic:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::Identity:
      break;
  }
  return z;
}

// Derivative expressed through the activation output y.
Eigen::MatrixXd derivative(Activation a, const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::Relu:
      return (y.array() > 0.0).cast<double>().matrix();
    case Activation::Logistic:
      return (y.array() * (1.0 - y.array())).matrix();
    case Activation::Identity:
      break;
  }
  return Eigen::MatrixXd::Ones(y.rows(), y.cols());
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Logistic:
      return "logistic";
    case Activation::Identity:
      break;
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "logistic") return Activation::Logistic;
  if (s == "identity") return Activation::Identity;
  throw SchemaError("unknown activation '" + s + "'");
}

Mlp::Mlp(std::vector<int> sizes_, Activation hidden_, Activation output_)
    : sizes(std::move(sizes_)), hidden(hidden_), output(output_) {
  if (sizes.size() < 2) throw ConfigError("a network needs at least input and output sizes");
  for (int s : sizes)
    if (s < 1) throw ConfigError("layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    layers.push_back({Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]), Eigen::VectorXd::Zero(sizes[l + 1])});
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

bool Mlp::finite() const {
  for (const auto& l : layers)
    if (!l.w.allFinite() || !l.b.allFinite()) return false;
  return true;
}

bool Mlp::same_shape(const Mlp& other) const {
  return sizes == other.sizes && hidden == other.hidden && output == other.output;
}

void Mlp::init(std::mt19937_64& rng) {
  for (auto& l : layers) {
    const double r = 1.0 / std::sqrt(static_cast<double>(l.w.cols()));
    std::uniform_real_distribution<double> u(-r, r);
    // Fill in a fixed order so results do not depend on Eigen's traversal.
    for (Eigen::Index i = 0; i < l.w.rows(); ++i)
      for (Eigen::Index j = 0; j < l.w.cols(); ++j) l.w(i, j) = u(rng);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = u(rng);
  }
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, Tape* tape) {
  if (x.rows() != net.input_size())
    throw DimensionMismatch("network expects " + std::to_string(net.input_size()) + " inputs, got " +
                            std::to_string(x.rows()));
  if (tape) {
    tape->inputs.clear();
    tape->outputs.clear();
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const bool last = l + 1 == net.layers.size();
    Eigen::MatrixXd z = layer.w * a;
    z.colwise() += layer.b;
    Eigen::MatrixXd y = activate(last ? net.output : net.hidden, z);
    if (tape) {
      tape->inputs.push_back(std::move(a));
      tape->outputs.push_back(y);
    }
    a = std::move(y);
  }
  return a;
}

Gradients backprop_grads(const Mlp& net, const Tape& tape, const Eigen::MatrixXd& upstream) {
  const std::size_t n = net.layers.size();
  if (tape.outputs.size() != n || upstream.rows() != net.output_size() || upstream.cols() != tape.outputs.back().cols())
    throw DimensionMismatch("upstream gradient does not match the recorded forward pass");
  Gradients g;
  g.layers.resize(n);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = n; k-- > 0;) {
    const auto act = k + 1 == n ? net.output : net.hidden;
    delta = delta.cwiseProduct(derivative(act, tape.outputs[k]));
    g.layers[k].w = delta * tape.inputs[k].transpose();
    g.layers[k].b = delta.rowwise().sum();
    delta = net.layers[k].w.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

std::vector<double> actor_forward(const Mlp& actor, const std::vector<double>& obs) {
  const Eigen::VectorXd y = forward(actor, to_vector(obs)).col(0);
  return {y.data(), y.data() + y.size()};
}

double critic_forward(const Mlp& critic, const std::vector<double>& obs, const std::vector<double>& action) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(obs.size() + action.size()));
  x << to_vector(obs), to_vector(action);
  if (critic.output_size() != 1) throw DimensionMismatch("critic must have one output");
  return forward(critic, x)(0, 0);
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!target.same_shape(online)) throw ArchitectureMismatch("soft update between different architectures");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].w = tau * online.layers[l].w + (1.0 - tau) * target.layers[l].w;
    target.layers[l].b = tau * online.layers[l].b + (1.0 - tau) * target.layers[l].b;
  }
}

void Adam::step(Mlp& net, const Gradients& grads, double lr) {
  if (m.empty()) {
    for (const auto& l : net.layers) {
      m.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
      v.push_back(m.back());
    }
  }
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto update = [&](auto& param, auto& mm, auto& vv, const auto& g) {
    mm = beta1 * mm + (1.0 - beta1) * g;
    vv = beta2 * vv + (1.0 - beta2) * g.cwiseProduct(g);
    param.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].w, m[l].w, v[l].w, grads.layers[l].w);
    update(net.layers[l].b, m[l].b, v[l].b, grads.layers[l].b);
  }
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json j;
  j["sizes"] = net.sizes;
  j["hidden"] = to_string(net.hidden);
  j["output"] = to_string(net.output);
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers) {
    std::vector<double> w;  // row-major
    for (Eigen::Index i = 0; i < l.w.rows(); ++i)
      for (Eigen::Index k = 0; k < l.w.cols(); ++k) w.push_back(l.w(i, k));
    layers.push_back({{"w", w}, {"b", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
  }
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("sizes").get<std::vector<int>>(), activation_from_string(j.at("hidden").get<std::string>()),
          activation_from_string(j.at("output").get<std::string>()));
  const auto& layers = j.at("layers");
  if (layers.size() != net.layers.size()) throw SchemaError("layer count disagrees with sizes");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    const auto w = layers[l].at("w").get<std::vector<double>>();
    const auto b = layers[l].at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != layer.w.size() || static_cast<Eigen::Index>(b.size()) != layer.b.size())
      throw SchemaError("parameter count disagrees with layer shape");
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(i, c) = w[k++];
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = b[i];
  }
  if (!net.finite()) throw SchemaError("network parameters must be finite");
  return net;
}

}  // namespace windbid
