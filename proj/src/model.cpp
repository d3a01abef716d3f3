#include "meshff/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace meshff::nn {

std::string_view to_string(LayerType type) {
  switch (type) {
    case LayerType::kMeshConv: return "MeshConv";
    case LayerType::kInstanceNorm: return "InstanceNorm";
    case LayerType::kReLU: return "ReLU";
    case LayerType::kPool: return "Pool";
    case LayerType::kUnpool: return "Unpool";
    case LayerType::kGlobalAveragePool: return "GlobalAveragePool";
    case LayerType::kDense: return "Dense";
  }
  return "?";
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values) n += static_cast<std::size_t>(v.size());
  return n;
}

namespace {

std::vector<std::pair<std::string, std::pair<int, int>>> parameter_shapes(const std::vector<LayerSpec>& layers) {
  std::vector<std::pair<std::string, std::pair<int, int>>> shapes;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string prefix = "layer" + std::to_string(i) + ".";
    switch (l.type) {
      case LayerType::kMeshConv:
        for (int j = 0; j < 5; ++j) shapes.push_back({prefix + "theta" + std::to_string(j), {l.in, l.out}});
        shapes.push_back({prefix + "bias", {1, l.out}});
        break;
      case LayerType::kInstanceNorm:
        shapes.push_back({prefix + "gamma", {1, l.in}});
        shapes.push_back({prefix + "beta", {1, l.in}});
        break;
      case LayerType::kDense:
        shapes.push_back({prefix + "weight", {l.in, l.out}});
        shapes.push_back({prefix + "bias", {1, l.out}});
        break;
      default:
        break;
    }
  }
  return shapes;
}

}  // namespace

Model::Model(std::vector<LayerSpec> layers, PoolPolicy policy, std::uint64_t seed)
    : layers_(std::move(layers)), policy_(policy) {
  check_layers();
  std::mt19937_64 rng(seed);
  for (auto& [name, shape] : parameter_shapes(layers_)) {
    const auto [rows, cols] = shape;
    Matrix m;
    const bool is_gamma = name.ends_with("gamma");
    const bool is_bias = name.ends_with("bias") || name.ends_with("beta");
    if (is_gamma) {
      m = Matrix::Ones(rows, cols);
    } else if (is_bias) {
      m = Matrix::Zero(rows, cols);
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> uni(-limit, limit);
      m.resize(rows, cols);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uni(rng);
    }
    params_.names.push_back(name);
    params_.values.push_back(std::move(m));
  }
}

Model::Model(std::vector<LayerSpec> layers, PoolPolicy policy, Parameters params)
    : layers_(std::move(layers)), policy_(policy), params_(std::move(params)) {
  check_layers();
  const auto shapes = parameter_shapes(layers_);
  if (shapes.size() != params_.size()) throw std::invalid_argument("parameter count does not match layers");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [rows, cols] = shapes[i].second;
    if (params_.values[i].rows() != rows || params_.values[i].cols() != cols) {
      throw std::invalid_argument("parameter " + shapes[i].first + " has the wrong shape");
    }
  }
}

void Model::check_layers() {
  if (layers_.empty() || layers_.front().type != LayerType::kMeshConv) {
    throw std::invalid_argument("model must start with a MeshConv layer");
  }
  int channels = layers_.front().in;
  input_channels_ = channels;
  int open_pools = 0;
  bool per_mesh = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("layer " + std::to_string(i) + " (" + std::string(to_string(l.type)) +
                                  "): " + why);
    };
    switch (l.type) {
      case LayerType::kMeshConv:
        if (per_mesh) fail("edge layer after global pooling");
        if (l.in != channels || l.out <= 0) fail("expects " + std::to_string(l.in) + " channels, has " +
                                                 std::to_string(channels));
        channels = l.out;
        break;
      case LayerType::kInstanceNorm:
        if (per_mesh) fail("edge layer after global pooling");
        if (l.in != channels) fail("channel count mismatch");
        break;
      case LayerType::kReLU:
        break;
      case LayerType::kPool:
        if (per_mesh) fail("edge layer after global pooling");
        if (l.target == 0) fail("pool target must be positive");
        ++open_pools;
        break;
      case LayerType::kUnpool:
        if (per_mesh || open_pools == 0) fail("unpool without a matching pool");
        --open_pools;
        break;
      case LayerType::kGlobalAveragePool:
        if (per_mesh) fail("repeated global pooling");
        per_mesh = true;
        break;
      case LayerType::kDense:
        if (!per_mesh) fail("dense layer needs global pooling first");
        if (l.in != channels || l.out <= 0) fail("channel count mismatch");
        channels = l.out;
        break;
    }
  }
  if (!per_mesh && open_pools != 0) throw std::invalid_argument("every pool needs a matching unpool");
  output_channels_ = channels;
  per_mesh_output_ = per_mesh;
}

ForwardPass Model::forward(const Matrix& features, const EdgeTopology& topology) const {
  if (features.cols() != input_channels_) {
    throw std::invalid_argument("model expects " + std::to_string(input_channels_) + " input channels, got " +
                                std::to_string(features.cols()));
  }
  if (static_cast<std::size_t>(features.rows()) != topology.edge_count()) {
    throw std::invalid_argument("feature rows do not match edge count");
  }
  ForwardPass pass;
  Tape& tape = *pass.tape_;
  for (const Matrix& p : params_.values) pass.param_vars_.push_back(tape.parameter(p));

  auto topo = std::make_shared<const EdgeTopology>(topology);
  pass.topologies_.push_back(topo);
  std::vector<std::pair<std::shared_ptr<const PoolHistory>, std::shared_ptr<const EdgeTopology>>> stack;

  Var x = tape.constant(features);
  std::size_t next_param = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    try {
      switch (l.type) {
        case LayerType::kMeshConv: {
          std::array<Var, 5> w{};
          for (int j = 0; j < 5; ++j) w[j] = pass.param_vars_[next_param++];
          const Var bias = pass.param_vars_[next_param++];
          x = mesh_conv(tape, x, *topo, std::span<const Var, 5>(w), bias);
          break;
        }
        case LayerType::kInstanceNorm: {
          const Var gamma = pass.param_vars_[next_param++];
          const Var beta = pass.param_vars_[next_param++];
          x = instance_norm(tape, x, gamma, beta, kInstanceNormEps);
          break;
        }
        case LayerType::kReLU:
          x = relu(tape, x);
          break;
        case LayerType::kPool: {
          std::shared_ptr<const PoolHistory> history;
          EdgeTopology pooled;
          x = mesh_pool(tape, x, *topo, l.target, policy_, &history, &pooled);
          stack.emplace_back(history, topo);
          pass.histories_.push_back(history);
          topo = std::make_shared<const EdgeTopology>(std::move(pooled));
          break;
        }
        case LayerType::kUnpool: {
          auto [history, previous] = stack.back();
          stack.pop_back();
          x = mesh_unpool(tape, x, history);
          topo = previous;
          break;
        }
        case LayerType::kGlobalAveragePool:
          x = global_average_pool(tape, x);
          break;
        case LayerType::kDense: {
          const Var w = pass.param_vars_[next_param++];
          const Var b = pass.param_vars_[next_param++];
          x = add_row(tape, matmul(tape, x, w), b);
          break;
        }
      }
    } catch (const PoolExhaustedError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("layer " + std::to_string(i) + " (" + std::string(to_string(l.type)) +
                                  "): " + e.what());
    }
    pass.topologies_.push_back(topo);
  }
  pass.output_ = x;
  return pass;
}

Var ForwardPass::cross_entropy_loss(int label) { return cross_entropy(*tape_, output_, label); }

Var ForwardPass::cross_entropy_loss(std::span<const int> edge_labels) {
  return cross_entropy_rows(*tape_, output_, edge_labels);
}

Var ForwardPass::mse_loss(const Matrix& target) { return mse(*tape_, output_, target); }

Var ForwardPass::scaled(Var loss, double factor) { return scale(*tape_, loss, factor); }

Gradients ForwardPass::backward(Var loss) {
  if (consumed_) throw std::logic_error("backward already ran on this forward pass; run forward again");
  consumed_ = true;
  tape_->backward(loss);
  Gradients grads;
  grads.reserve(param_vars_.size());
  for (Var p : param_vars_) {
    const Matrix& g = tape_->grad(p);
    grads.push_back(g.size() == 0 ? Matrix::Zero(tape_->value(p).rows(), tape_->value(p).cols()) : g);
  }
  return grads;
}

Gradients zero_gradients(const Parameters& params) {
  Gradients g;
  for (const auto& p : params.values) g.push_back(Matrix::Zero(p.rows(), p.cols()));
  return g;
}

void add_gradients(Gradients& into, const Gradients& g) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
}

void scale_gradients(Gradients& g, double factor) {
  for (auto& m : g) m *= factor;
}

}  // namespace meshff::nn
