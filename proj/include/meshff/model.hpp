#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshff/tape.hpp"

namespace meshff::nn {

enum class LayerType : std::uint32_t {
  kMeshConv = 1,
  kInstanceNorm = 2,
  kReLU = 3,
  kPool = 4,
  kUnpool = 5,
  kGlobalAveragePool = 6,
  kDense = 7,
};

std::string_view to_string(LayerType type);

struct LayerSpec {
  LayerType type = LayerType::kReLU;
  int in = 0;   // MeshConv, Dense: input channels; InstanceNorm: channels
  int out = 0;  // MeshConv, Dense: output channels
  std::uint64_t target = 0;  // Pool: target edge count

  static LayerSpec conv(int in, int out) { return {LayerType::kMeshConv, in, out, 0}; }
  static LayerSpec norm(int channels) { return {LayerType::kInstanceNorm, channels, channels, 0}; }
  static LayerSpec relu() { return {LayerType::kReLU, 0, 0, 0}; }
  static LayerSpec pool(std::uint64_t target) { return {LayerType::kPool, 0, 0, target}; }
  static LayerSpec unpool() { return {LayerType::kUnpool, 0, 0, 0}; }
  static LayerSpec global_average() { return {LayerType::kGlobalAveragePool, 0, 0, 0}; }
  static LayerSpec dense(int in, int out) { return {LayerType::kDense, in, out, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr double kInstanceNormEps = 1e-10;

/// Named parameter blocks, in registration order.
struct Parameters {
  std::vector<std::string> names;
  std::vector<Matrix> values;

  std::size_t size() const { return values.size(); }
  std::size_t scalar_count() const;
};

using Gradients = std::vector<Matrix>;

class ForwardPass;

/// Layer stack plus parameters. Channel compatibility between layers is
/// checked at construction; every Pool must be matched by a later Unpool or
/// precede a GlobalAveragePool.
class Model {
 public:
  Model() = default;
  Model(std::vector<LayerSpec> layers, PoolPolicy policy, std::uint64_t seed);
  /// Rebuilds a model from saved parameters (shapes are validated).
  Model(std::vector<LayerSpec> layers, PoolPolicy policy, Parameters params);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }
  PoolPolicy pool_policy() const { return policy_; }
  void set_pool_policy(PoolPolicy p) { policy_ = p; }
  int input_channels() const { return input_channels_; }
  int output_channels() const { return output_channels_; }
  /// True when the output is one row per mesh (ends in GlobalAveragePool/Dense).
  bool per_mesh_output() const { return per_mesh_output_; }

  ForwardPass forward(const Matrix& features, const EdgeTopology& topology) const;

 private:
  void check_layers();
  std::vector<LayerSpec> layers_;
  PoolPolicy policy_ = PoolPolicy::kEnhanced;
  Parameters params_;
  int input_channels_ = 0;
  int output_channels_ = 0;
  bool per_mesh_output_ = false;
};

/// State of one forward evaluation: the tape, the pooled topologies and
/// histories, and the output node. The reverse pass may run once.
class ForwardPass {
 public:
  const Matrix& output() const { return tape_->value(output_); }
  const std::vector<std::shared_ptr<const PoolHistory>>& pool_histories() const { return histories_; }
  /// Topology seen by each layer's input (index 0 is the input mesh).
  const std::vector<std::shared_ptr<const EdgeTopology>>& topologies() const { return topologies_; }

  Var cross_entropy_loss(int label);
  Var cross_entropy_loss(std::span<const int> edge_labels);
  Var mse_loss(const Matrix& target);
  /// Multiplies a loss node by a constant (gradient scaling).
  Var scaled(Var loss, double factor);
  double loss_value(Var loss) const { return tape_->value(loss)(0, 0); }

  /// Reverse pass from `loss`; returns one gradient per parameter block.
  /// Throws std::logic_error when called twice on the same pass.
  Gradients backward(Var loss);

 private:
  friend class Model;
  std::unique_ptr<Tape> tape_ = std::make_unique<Tape>();
  Var output_;
  std::vector<Var> param_vars_;
  std::vector<std::shared_ptr<const PoolHistory>> histories_;
  std::vector<std::shared_ptr<const EdgeTopology>> topologies_;
  bool consumed_ = false;
};

Gradients zero_gradients(const Parameters& params);
void add_gradients(Gradients& into, const Gradients& g);
void scale_gradients(Gradients& g, double factor);

}  // namespace meshff::nn
