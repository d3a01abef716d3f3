#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "meshff/conv.hpp"
#include "meshff/features.hpp"
#include "meshff/pool.hpp"

namespace meshff::nn {

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, which is a
/// topological order, so the reverse pass walks the tape backwards once.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var constant(Matrix value);
  Var parameter(Matrix value);  // records a gradient
  Var push(Matrix value, std::vector<int> parents, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  /// Accumulator for node `id`, allocated on first use.
  Matrix& grad_ref(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and runs the reverse pass.
  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> parents;
    Backward backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. Each returns a new node on `tape`.

Var matmul(Tape& tape, Var x, Var w);
Var add_row(Tape& tape, Var x, Var bias);  // broadcast 1xC over rows
Var relu(Tape& tape, Var x);
Var scale(Tape& tape, Var x, double factor);

/// Per-channel normalization over the rows of one mesh, then affine:
/// y = (x - mean) / sqrt(var + eps) * gamma + beta.
Var instance_norm(Tape& tape, Var x, Var gamma, Var beta, double eps);

/// Edge convolution; `weights` are the five kernels, `bias` is 1 x out.
Var mesh_conv(Tape& tape, Var x, const EdgeTopology& topology, std::span<const Var, 5> weights,
              Var bias);

/// Mean over rows, giving 1 x C.
Var global_average_pool(Tape& tape, Var x);

/// Pooling; `result` receives the pooled topology and history (features are
/// on the tape). The history object must outlive the reverse pass.
Var mesh_pool(Tape& tape, Var x, const EdgeTopology& topology, std::size_t target,
              PoolPolicy policy, std::shared_ptr<const PoolHistory>* history,
              EdgeTopology* pooled_topology);
Var mesh_unpool(Tape& tape, Var x, std::shared_ptr<const PoolHistory> history);

/// -log softmax(logits)[label] for a 1 x K row.
Var cross_entropy(Tape& tape, Var logits, int label);
/// Mean over rows of the per-row cross entropy (per-edge labels).
Var cross_entropy_rows(Tape& tape, Var logits, std::span<const int> labels);
/// Mean of squared differences over all entries.
Var mse(Tape& tape, Var prediction, const Matrix& target);

}  // namespace meshff::nn
