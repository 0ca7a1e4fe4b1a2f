#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "starris/random.hpp"

namespace starris {

/// Fully connected network with tanh hidden layers and a linear output.
/// Batched evaluation takes one sample per column.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized parameters; sizes = {input, hidden..., output}.
  explicit Mlp(std::vector<int> sizes);

  // Uniform Glorot initialization; the output layer is scaled by output_scale.
  void init(Rng& rng, double output_scale = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }

  struct Tape {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden outputs..., output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape& tape) const;

  // Gradient of sum_columns <d_output, output> w.r.t. the flat parameters
  // (layout of flatten()).
  Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& d_output) const;

  std::size_t num_params() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  bool all_finite() const;

  std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> sizes_;
};

enum class StepRule { kRmsProp, kPlain };

/// Per-parameter adaptive step without momentum (RMSProp with a bias-corrected
/// second moment), or a plain gradient step.
class AdaptiveStep {
 public:
  AdaptiveStep() = default;
  AdaptiveStep(std::size_t n, StepRule rule, double decay = 0.99, double eps = 1e-8);

  // Descends when sign = -1, ascends when sign = +1.
  void apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr, double sign);

  StepRule rule() const { return rule_; }
  const Eigen::VectorXd& second_moment() const { return sq_; }
  long steps() const { return steps_; }
  void restore(Eigen::VectorXd sq, long steps) {
    sq_ = std::move(sq);
    steps_ = steps;
  }

 private:
  StepRule rule_ = StepRule::kRmsProp;
  double decay_ = 0.99;
  double eps_ = 1e-8;
  Eigen::VectorXd sq_;
  long steps_ = 0;
};

}  // namespace starris
