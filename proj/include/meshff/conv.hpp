#pragma once

#include <array>
#include <random>

#include "meshff/features.hpp"
#include "meshff/topology.hpp"

namespace meshff {

/// Five kernels of shape in x out: self, |a-c|, a+c, |b-d|, b+d.
struct ConvParams {
  std::array<Matrix, 5> weights;
  RowVector bias;

  int in_channels() const { return static_cast<int>(weights[0].rows()); }
  int out_channels() const { return static_cast<int>(weights[0].cols()); }
  bool is_finite() const;

  static ConvParams zeros(int in, int out);
};

/// Per-edge stack [x(e), |x(a)-x(c)|, x(a)+x(c), |x(b)-x(d)|, x(b)+x(d)],
/// shape edges x 5*channels. Empty ring slots read as zero rows.
Matrix gather_ring_terms(const Matrix& x, const EdgeTopology& topology);

Matrix conv_forward(const Matrix& x, const EdgeTopology& topology, const ConvParams& params);

struct ConvGradients {
  Matrix input;
  std::array<Matrix, 5> weights;
  RowVector bias;
};

/// Reverse pass of conv_forward. The subgradient of |t| at t = 0 is 0.
ConvGradients conv_backward(const Matrix& upstream, const Matrix& x, const EdgeTopology& topology,
                            const ConvParams& params);

}  // namespace meshff
