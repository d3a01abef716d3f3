#include "meshff/conv.hpp"

namespace meshff {
namespace {

Matrix stacked_weights(const ConvParams& p) {
  const int in = p.in_channels();
  Matrix w(5 * in, p.out_channels());
  for (int j = 0; j < 5; ++j) w.middleRows(j * in, in) = p.weights[j];
  return w;
}

void check_shapes(const Matrix& x, const EdgeTopology& t, const ConvParams& p) {
  if (x.cols() != p.in_channels()) {
    throw std::invalid_argument("mesh conv expects " + std::to_string(p.in_channels()) +
                                " input channels, got " + std::to_string(x.cols()));
  }
  if (static_cast<std::size_t>(x.rows()) != t.edge_count()) {
    throw std::invalid_argument("mesh conv: feature rows do not match edge count");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

bool ConvParams::is_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  return bias.allFinite();
}

ConvParams ConvParams::zeros(int in, int out) {
  ConvParams p;
  for (auto& w : p.weights) w = Matrix::Zero(in, out);
  p.bias = RowVector::Zero(out);
  return p;
}

Matrix gather_ring_terms(const Matrix& x, const EdgeTopology& t) {
  const Eigen::Index m = x.rows();
  const Eigen::Index c = x.cols();
  Matrix g(m, 5 * c);
  const RowVector zero = RowVector::Zero(c);
  auto row = [&](int e) -> Eigen::Ref<const RowVector> {
    return e == kNoEdge ? Eigen::Ref<const RowVector>(zero) : Eigen::Ref<const RowVector>(x.row(e));
  };
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& ring = t.neighbors[e];
    const auto a = row(ring[0]);
    const auto b = row(ring[1]);
    const auto cc = row(ring[2]);
    const auto d = row(ring[3]);
    g.block(e, 0, 1, c) = x.row(e);
    g.block(e, c, 1, c) = (a - cc).cwiseAbs();
    g.block(e, 2 * c, 1, c) = a + cc;
    g.block(e, 3 * c, 1, c) = (b - d).cwiseAbs();
    g.block(e, 4 * c, 1, c) = b + d;
  }
  return g;
}

Matrix conv_forward(const Matrix& x, const EdgeTopology& t, const ConvParams& p) {
  check_shapes(x, t, p);
  Matrix out = gather_ring_terms(x, t) * stacked_weights(p);
  out.rowwise() += p.bias;
  return out;
}

ConvGradients conv_backward(const Matrix& upstream, const Matrix& x, const EdgeTopology& t,
                            const ConvParams& p) {
  check_shapes(x, t, p);
  const Eigen::Index m = x.rows();
  const Eigen::Index c = x.cols();
  const Matrix g = gather_ring_terms(x, t);

  ConvGradients grads;
  const Matrix gw = g.transpose() * upstream;
  for (int j = 0; j < 5; ++j) grads.weights[j] = gw.middleRows(j * c, c);
  grads.bias = upstream.colwise().sum();

  const Matrix gg = upstream * stacked_weights(p).transpose();
  grads.input = gg.leftCols(c);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& ring = t.neighbors[e];
    // Two symmetric pairs: (a, c) use blocks 1-2, (b, d) use blocks 3-4.
    for (int pair = 0; pair < 2; ++pair) {
      const int u = ring[pair];
      const int v = ring[pair + 2];
      const auto g_abs = gg.block(e, (1 + 2 * pair) * c, 1, c);
      const auto g_sum = gg.block(e, (2 + 2 * pair) * c, 1, c);
      for (Eigen::Index k = 0; k < c; ++k) {
        const double xu = u == kNoEdge ? 0.0 : x(u, k);
        const double xv = v == kNoEdge ? 0.0 : x(v, k);
        const double s = sign(xu - xv) * g_abs(0, k);
        if (u != kNoEdge) grads.input(u, k) += s + g_sum(0, k);
        if (v != kNoEdge) grads.input(v, k) += -s + g_sum(0, k);
      }
    }
  }
  return grads;
}

}  // namespace meshff
