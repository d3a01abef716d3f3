#pragma once

#include <cstdint>
#include <string_view>

#include "meshff/model.hpp"

namespace meshff::nn {

enum class OptimizerMethod { kSgdMomentum, kAdam };

std::string_view to_string(OptimizerMethod m);
OptimizerMethod parse_optimizer(std::string_view name);  // "sgd" | "adam"

struct OptimizerSettings {
  OptimizerMethod method = OptimizerMethod::kAdam;
  double learning_rate = 2e-4;
  double momentum = 0.9;  // SGD
  double beta1 = 0.9;     // Adam
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class NonFiniteGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SGD with momentum (v <- mu*v + g; p <- p - lr*v) or Adam with bias
/// correction. Moment buffers are created lazily on the first step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerSettings settings) : settings_(settings) {}

  void step(Parameters& params, const Gradients& grads);

  double learning_rate() const { return settings_.learning_rate; }
  void set_learning_rate(double lr) { settings_.learning_rate = lr; }
  std::uint64_t steps() const { return step_; }
  const OptimizerSettings& settings() const { return settings_; }

 private:
  OptimizerSettings settings_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

}  // namespace meshff::nn
