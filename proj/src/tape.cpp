#include "meshff/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace meshff::nn {

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), {}, {}, {}, false});
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back({std::move(value), {}, {}, {}, true});
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Matrix value, std::vector<int> parents, Backward backward) {
  bool needs = false;
  for (int p : parents) needs = needs || nodes_[p].needs_grad;
  nodes_.push_back({std::move(value), {}, std::move(parents), std::move(backward), needs});
  return {static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw std::invalid_argument("backward needs a scalar root");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  grad_ref(root.id)(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward || n.grad.size() == 0) continue;
    n.backward(*this, i);
  }
}

namespace {

void accumulate(Tape& t, int id, const Matrix& g) {
  if (t.needs_grad(id)) t.grad_ref(id) += g;
}

}  // namespace

Var matmul(Tape& tape, Var x, Var w) {
  if (tape.value(x).cols() != tape.value(w).rows()) throw std::invalid_argument("matmul: shape mismatch");
  return tape.push(tape.value(x) * tape.value(w), {x.id, w.id}, [x, w](Tape& t, int self) {
    const Matrix g = t.grad_ref(self);
    accumulate(t, x.id, g * t.value(w).transpose());
    accumulate(t, w.id, t.value(x).transpose() * g);
  });
}

Var add_row(Tape& tape, Var x, Var bias) {
  const Matrix& b = tape.value(bias);
  if (b.rows() != 1 || b.cols() != tape.value(x).cols()) throw std::invalid_argument("add_row: shape mismatch");
  Matrix out = tape.value(x);
  out.rowwise() += RowVector(b);
  return tape.push(std::move(out), {x.id, bias.id}, [x, bias](Tape& t, int self) {
    const Matrix g = t.grad_ref(self);
    accumulate(t, x.id, g);
    accumulate(t, bias.id, g.colwise().sum());
  });
}

Var relu(Tape& tape, Var x) {
  return tape.push(tape.value(x).cwiseMax(0.0), {x.id}, [x](Tape& t, int self) {
    const Matrix mask = (t.value(x).array() > 0.0).cast<double>().matrix();
    accumulate(t, x.id, t.grad_ref(self).cwiseProduct(mask));
  });
}

Var scale(Tape& tape, Var x, double factor) {
  return tape.push(tape.value(x) * factor, {x.id}, [x, factor](Tape& t, int self) {
    accumulate(t, x.id, t.grad_ref(self) * factor);
  });
}

Var instance_norm(Tape& tape, Var x, Var gamma, Var beta, double eps) {
  const Matrix& in = tape.value(x);
  const double n = static_cast<double>(in.rows());
  if (in.rows() == 0) throw std::invalid_argument("instance_norm: empty input");
  const RowVector mean = in.colwise().mean();
  const Matrix centered = in.rowwise() - mean;
  const RowVector inv_std =
      ((centered.array().square().colwise().sum() / n) + eps).sqrt().inverse().matrix();
  Matrix xhat = (centered.array().rowwise() * inv_std.array()).matrix();
  Matrix out = (xhat.array().rowwise() * RowVector(tape.value(gamma)).array()).matrix();
  out.rowwise() += RowVector(tape.value(beta));
  auto cached = std::make_shared<Matrix>(std::move(xhat));
  return tape.push(std::move(out), {x.id, gamma.id, beta.id},
                   [x, gamma, beta, cached, inv_std, n](Tape& t, int self) {
                     const Matrix g = t.grad_ref(self);
                     const Matrix& xh = *cached;
                     accumulate(t, gamma.id, g.cwiseProduct(xh).colwise().sum());
                     accumulate(t, beta.id, g.colwise().sum());
                     if (!t.needs_grad(x.id)) return;
                     const Matrix dxhat = (g.array().rowwise() * RowVector(t.value(gamma)).array()).matrix();
                     const RowVector m1 = dxhat.colwise().sum() / n;
                     const RowVector m2 = dxhat.cwiseProduct(xh).colwise().sum() / n;
                     Matrix dx = dxhat.rowwise() - m1;
                     dx -= (xh.array().rowwise() * m2.array()).matrix();
                     dx = (dx.array().rowwise() * inv_std.array()).matrix();
                     t.grad_ref(x.id) += dx;
                   });
}

Var mesh_conv(Tape& tape, Var x, const EdgeTopology& topology, std::span<const Var, 5> weights, Var bias) {
  ConvParams params;
  for (int j = 0; j < 5; ++j) params.weights[j] = tape.value(weights[j]);
  params.bias = tape.value(bias);
  Matrix out = conv_forward(tape.value(x), topology, params);
  std::vector<int> parents{x.id};
  std::array<Var, 5> w{};
  for (int j = 0; j < 5; ++j) {
    parents.push_back(weights[j].id);
    w[j] = weights[j];
  }
  parents.push_back(bias.id);
  // Topology is owned by the caller (model forward pass) for the tape's life.
  const EdgeTopology* topo = &topology;
  return tape.push(std::move(out), std::move(parents), [x, w, bias, topo](Tape& t, int self) {
    ConvParams p;
    for (int j = 0; j < 5; ++j) p.weights[j] = t.value(w[j]);
    p.bias = t.value(bias);
    ConvGradients g = conv_backward(t.grad_ref(self), t.value(x), *topo, p);
    accumulate(t, x.id, g.input);
    for (int j = 0; j < 5; ++j) accumulate(t, w[j].id, g.weights[j]);
    accumulate(t, bias.id, g.bias);
  });
}

Var global_average_pool(Tape& tape, Var x) {
  const Matrix& in = tape.value(x);
  if (in.rows() == 0) throw std::invalid_argument("global_average_pool: empty input");
  const double n = static_cast<double>(in.rows());
  Matrix out = in.colwise().mean();
  return tape.push(std::move(out), {x.id}, [x, n](Tape& t, int self) {
    if (!t.needs_grad(x.id)) return;
    const RowVector g = RowVector(t.grad_ref(self)) / n;
    t.grad_ref(x.id).rowwise() += g;
  });
}

Var mesh_pool(Tape& tape, Var x, const EdgeTopology& topology, std::size_t target, PoolPolicy policy,
              std::shared_ptr<const PoolHistory>* history, EdgeTopology* pooled_topology) {
  PoolResult r = pool(tape.value(x), topology, target, policy);
  auto h = std::make_shared<const PoolHistory>(std::move(r.history));
  if (history) *history = h;
  if (pooled_topology) *pooled_topology = std::move(r.topology);
  return tape.push(std::move(r.features), {x.id}, [x, h](Tape& t, int self) {
    accumulate(t, x.id, pool_backward(t.grad_ref(self), *h));
  });
}

Var mesh_unpool(Tape& tape, Var x, std::shared_ptr<const PoolHistory> history) {
  Matrix out = unpool(tape.value(x), *history);
  return tape.push(std::move(out), {x.id}, [x, history](Tape& t, int self) {
    accumulate(t, x.id, unpool_backward(t.grad_ref(self), *history));
  });
}

namespace {

// Row-wise softmax and the mean of -log p[label] over rows.
std::pair<Matrix, double> softmax_xent(const Matrix& logits, std::span<const int> labels) {
  Matrix p(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || label >= logits.cols()) {
      throw std::out_of_range("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(logits.cols()) + ")");
    }
    const double mx = logits.row(r).maxCoeff();
    const RowVector ex = (logits.row(r).array() - mx).exp().matrix();
    const double z = ex.sum();
    p.row(r) = ex / z;
    loss += -(logits(r, label) - mx - std::log(z));
  }
  return {std::move(p), loss / static_cast<double>(logits.rows())};
}

}  // namespace

Var cross_entropy_rows(Tape& tape, Var logits, std::span<const int> labels) {
  const Matrix& z = tape.value(logits);
  if (static_cast<std::size_t>(z.rows()) != labels.size()) {
    throw std::invalid_argument("cross_entropy: label count does not match rows");
  }
  auto [p, loss] = softmax_xent(z, labels);
  std::vector<int> lab(labels.begin(), labels.end());
  Matrix out(1, 1);
  out(0, 0) = loss;
  return tape.push(std::move(out), {logits.id},
                   [logits, p = std::move(p), lab = std::move(lab)](Tape& t, int self) {
                     Matrix g = p;
                     for (std::size_t r = 0; r < lab.size(); ++r) g(r, lab[r]) -= 1.0;
                     g *= t.grad_ref(self)(0, 0) / static_cast<double>(lab.size());
                     accumulate(t, logits.id, g);
                   });
}

Var cross_entropy(Tape& tape, Var logits, int label) {
  if (tape.value(logits).rows() != 1) throw std::invalid_argument("cross_entropy expects a single row");
  const int labels[1] = {label};
  return cross_entropy_rows(tape, logits, labels);
}

Var mse(Tape& tape, Var prediction, const Matrix& target) {
  const Matrix& pred = tape.value(prediction);
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("mse: prediction and target shapes differ");
  }
  Matrix diff = pred - target;
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / static_cast<double>(diff.size());
  return tape.push(std::move(out), {prediction.id}, [prediction, diff = std::move(diff)](Tape& t, int self) {
    accumulate(t, prediction.id, diff * (2.0 * t.grad_ref(self)(0, 0) / static_cast<double>(diff.size())));
  });
}

}  // namespace meshff::nn
