#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace windbid {

enum class Activation { Identity, Relu, Logistic };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

// Fully connected network. Batched calls take one sample per column.
struct Mlp {
  std::vector<int> sizes;  // input, hidden..., output
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;
  std::vector<Layer> layers;

  Mlp() = default;
  // Zero-initialised parameters.
  Mlp(std::vector<int> sizes, Activation hidden, Activation output);

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  std::size_t parameter_count() const;
  bool finite() const;
  bool same_shape(const Mlp& other) const;

  // Uniform in +-1/sqrt(fan_in) for weights and biases.
  void init(std::mt19937_64& rng);
};

// Activations cached by a forward pass for reuse in backprop.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation of each layer
};

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, Tape* tape = nullptr);

struct Gradients {
  std::vector<Layer> layers;  // same shapes as the net
  Eigen::MatrixXd input;      // d loss / d input, one column per sample
};

// Given d loss / d output (one column per sample), returns gradients of the
// loss summed over the batch.
Gradients backprop_grads(const Mlp& net, const Tape& tape, const Eigen::MatrixXd& upstream);

// Single-sample helpers.
std::vector<double> actor_forward(const Mlp& actor, const std::vector<double>& obs);
double critic_forward(const Mlp& critic, const std::vector<double>& obs, const std::vector<double>& action);

// target <- tau * online + (1 - tau) * target
void soft_update(Mlp& target, const Mlp& online, double tau);

struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<Layer> m, v;

  void step(Mlp& net, const Gradients& grads, double lr);
};

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

}  // namespace windbid
