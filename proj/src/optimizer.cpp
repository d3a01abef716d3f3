#include "meshff/optimizer.hpp"

#include <cmath>

namespace meshff::nn {

std::string_view to_string(OptimizerMethod m) {
  return m == OptimizerMethod::kAdam ? "adam" : "sgd";
}

OptimizerMethod parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerMethod::kAdam;
  if (name == "sgd") return OptimizerMethod::kSgdMomentum;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void Optimizer::step(Parameters& params, const Gradients& grads) {
  if (grads.size() != params.size()) throw std::invalid_argument("gradient count does not match parameters");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].rows() != params.values[i].rows() || grads[i].cols() != params.values[i].cols()) {
      throw std::invalid_argument("gradient shape mismatch for " + params.names[i]);
    }
    if (!grads[i].allFinite()) throw NonFiniteGradientError("non-finite gradient for " + params.names[i]);
  }
  if (first_.empty()) {
    for (const auto& p : params.values) {
      first_.push_back(Matrix::Zero(p.rows(), p.cols()));
      if (settings_.method == OptimizerMethod::kAdam) second_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  ++step_;
  const double lr = settings_.learning_rate;
  if (settings_.method == OptimizerMethod::kSgdMomentum) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
      first_[i] = settings_.momentum * first_[i] + grads[i];
      params.values[i] -= lr * first_[i];
    }
    return;
  }
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    first_[i] = b1 * first_[i] + (1.0 - b1) * grads[i];
    second_[i] = b2 * second_[i] + (1.0 - b2) * grads[i].cwiseAbs2();
    const auto mhat = first_[i].array() / c1;
    const auto vhat = second_[i].array() / c2;
    params.values[i].array() -= lr * mhat / (vhat.sqrt() + settings_.epsilon);
  }
}

}  // namespace meshff::nn
