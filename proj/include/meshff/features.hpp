#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "meshff/mesh.hpp"
#include "meshff/topology.hpp"

namespace meshff {

/// Row-major dense matrix; one row per edge throughout the project.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

enum class FeatureKind : std::uint32_t {
  kFundamentalForms = 1,  // edge length, dihedral angle
  kMeshCnn5 = 2,          // dihedral, opposite angles (sorted), length/height ratios (sorted)
  kXyz = 3,               // edge midpoint
  kXyzInvariant = 4,      // endpoint dot product, mean endpoint norm
  kLaplacian = 5,         // midpoint of endpoint uniform Laplacian vectors
};

int channel_count(FeatureKind kind);
std::string_view to_string(FeatureKind kind);
/// Accepts the CLI spellings: ff, meshcnn5, xyz, xyz-inv, laplacian.
FeatureKind parse_feature_kind(std::string_view name);
/// True for kinds unchanged by rotations and translations.
bool is_rigid_invariant(FeatureKind kind);

struct FeatureTensor {
  FeatureKind kind = FeatureKind::kFundamentalForms;
  Matrix values;

  std::size_t edge_count() const { return static_cast<std::size_t>(values.rows()); }
  int channels() const { return static_cast<int>(values.cols()); }
};

struct FeatureOptions {
  // Signed dihedral: positive across convex edges, negative across concave
  // ones (for outward-oriented faces).
  bool signed_dihedral = false;
};

double dihedral_angle(const EdgeTopology& topology, const Mesh& mesh, int edge,
                      const FeatureOptions& options = {});

FeatureTensor fundamental_forms(const EdgeTopology& topology, const Mesh& mesh,
                                const FeatureOptions& options = {});
FeatureTensor meshcnn5(const EdgeTopology& topology, const Mesh& mesh,
                       const FeatureOptions& options = {});
FeatureTensor coordinate_features(const EdgeTopology& topology, const Mesh& mesh,
                                  FeatureKind variant);

/// Dispatches on kind.
FeatureTensor compute_features(const EdgeTopology& topology, const Mesh& mesh, FeatureKind kind,
                               const FeatureOptions& options = {});

inline constexpr double kStdFloor = 1e-8;

struct ChannelStats {
  RowVector mean;
  RowVector std;

  int channels() const { return static_cast<int>(mean.size()); }
};

/// Population mean and standard deviation per channel, pooled over every edge
/// of every tensor.
ChannelStats fit_channel_stats(std::span<const FeatureTensor> features);
ChannelStats fit_channel_stats(std::span<const Matrix> features);

FeatureTensor normalize(const FeatureTensor& features, const ChannelStats& stats);
FeatureTensor denormalize(const FeatureTensor& features, const ChannelStats& stats);
Matrix normalize(const Matrix& values, const ChannelStats& stats);
Matrix denormalize(const Matrix& values, const ChannelStats& stats);

/// Per-edge L2 norm of the feature rows (the pooling score / heat map).
std::vector<double> edge_norms(const Matrix& values);

/// Zeroes the MeshCNN5 channels whose bit is unset. Bit order follows the
/// channel order: dihedral, opposite angle x2, ratio x2. Parsed from strings
/// such as "10011".
using ChannelMask = std::vector<bool>;
ChannelMask parse_channel_mask(std::string_view bits);
void apply_channel_mask(Matrix& values, const ChannelMask& mask);

}  // namespace meshff
