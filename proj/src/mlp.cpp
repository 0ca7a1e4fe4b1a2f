#include "starris/mlp.hpp"

#include <cmath>

#include "starris/errors.hpp"

namespace starris {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("Mlp needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights.push_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    biases.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

void Mlp::init(Rng& rng, double output_scale) {
  for (int l = 0; l < num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
    const double scale = (l + 1 == num_layers()) ? output_scale : 1.0;
    auto& W = weights[l];
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      for (Eigen::Index r = 0; r < W.rows(); ++r) {
        W(r, c) = scale * uniform(rng, -limit, limit);
      }
    }
    biases[l].setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Eigen::MatrixXd a = input;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weights[l] * a;
    z.colwise() += biases[l];
    a = (l + 1 == num_layers()) ? z : Eigen::MatrixXd(z.array().tanh());
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Tape& tape) const {
  tape.activations.clear();
  tape.activations.push_back(input);
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weights[l] * tape.activations.back();
    z.colwise() += biases[l];
    if (l + 1 == num_layers()) {
      tape.activations.push_back(std::move(z));
    } else {
      tape.activations.push_back(z.array().tanh().matrix());
    }
  }
  return tape.activations.back();
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& d_output) const {
  Eigen::VectorXd grad(num_params());
  // Offsets of each layer's block in the flat layout.
  std::vector<Eigen::Index> offset(num_layers());
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offset[l] = pos;
    pos += weights[l].size() + biases[l].size();
  }
  Eigen::MatrixXd delta = d_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a_in = tape.activations[l];
    Eigen::MatrixXd dW = delta * a_in.transpose();
    Eigen::VectorXd db = delta.rowwise().sum();
    grad.segment(offset[l], dW.size()) = Eigen::Map<const Eigen::VectorXd>(dW.data(), dW.size());
    grad.segment(offset[l] + dW.size(), db.size()) = db;
    if (l > 0) {
      Eigen::MatrixXd back = weights[l].transpose() * delta;
      // tanh'(z) = 1 - a^2 on the hidden activation feeding this layer.
      delta = back.array() * (1.0 - a_in.array().square());
    }
  }
  return grad;
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd flat(num_params());
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    flat.segment(pos, weights[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
    pos += weights[l].size();
    flat.segment(pos, biases[l].size()) = biases[l];
    pos += biases[l].size();
  }
  return flat;
}

void Mlp::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_params()) {
    throw ShapeError("Mlp::assign: parameter count mismatch");
  }
  Eigen::Index pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights[l].data(), weights[l].size()) =
        flat.segment(pos, weights[l].size());
    pos += weights[l].size();
    biases[l] = flat.segment(pos, biases[l].size());
    pos += biases[l].size();
  }
}

bool Mlp::all_finite() const {
  for (int l = 0; l < num_layers(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_) return false;
  for (int l = 0; l < num_layers(); ++l) {
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

AdaptiveStep::AdaptiveStep(std::size_t n, StepRule rule, double decay, double eps)
    : rule_(rule), decay_(decay), eps_(eps), sq_(Eigen::VectorXd::Zero(n)) {}

void AdaptiveStep::apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr,
                         double sign) {
  if (grad.size() != params.size()) throw ShapeError("AdaptiveStep: gradient size mismatch");
  if (rule_ == StepRule::kPlain) {
    params += sign * lr * grad;
    return;
  }
  if (sq_.size() != params.size()) sq_ = Eigen::VectorXd::Zero(params.size());
  ++steps_;
  sq_ = decay_ * sq_ + (1.0 - decay_) * grad.cwiseAbs2();
  const double correction = 1.0 - std::pow(decay_, static_cast<double>(steps_));
  params.array() += sign * lr * grad.array() / ((sq_.array() / correction).sqrt() + eps_);
}

}  // namespace starris
