#include "meshff/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace meshff {
namespace {

struct FaceFrame {
  Vec3 normal;  // unit
  double area;
};

FaceFrame face_frame(const Mesh& mesh, const Face& f, int face_index) {
  const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
  const double len = n.norm();
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw GeometryError("face " + std::to_string(face_index) + " has zero area");
  }
  return {n / len, 0.5 * len};
}

// Vertex of face `f` not on its edge slot `k`.
int opposite_vertex(const Face& f, int k) { return f[(k + 2) % 3]; }

int slot_in_face(const EdgeTopology& t, int face, int edge) {
  const auto& fe = t.face_edges[face];
  return static_cast<int>(std::find(fe.begin(), fe.end(), edge) - fe.begin());
}

double angle_between(const Vec3& a, const Vec3& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

int channel_count(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kFundamentalForms: return 2;
    case FeatureKind::kMeshCnn5: return 5;
    case FeatureKind::kXyz: return 3;
    case FeatureKind::kXyzInvariant: return 2;
    case FeatureKind::kLaplacian: return 3;
  }
  throw std::invalid_argument("unknown feature kind");
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kFundamentalForms: return "ff";
    case FeatureKind::kMeshCnn5: return "meshcnn5";
    case FeatureKind::kXyz: return "xyz";
    case FeatureKind::kXyzInvariant: return "xyz-inv";
    case FeatureKind::kLaplacian: return "laplacian";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
  for (auto k : {FeatureKind::kFundamentalForms, FeatureKind::kMeshCnn5, FeatureKind::kXyz,
                 FeatureKind::kXyzInvariant, FeatureKind::kLaplacian}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown feature kind '" + std::string(name) + "'");
}

bool is_rigid_invariant(FeatureKind kind) {
  return kind == FeatureKind::kFundamentalForms || kind == FeatureKind::kMeshCnn5 ||
         kind == FeatureKind::kXyzInvariant;
}

double dihedral_angle(const EdgeTopology& t, const Mesh& mesh, int edge, const FeatureOptions& options) {
  const auto [f1, f2] = t.edge_faces[edge];
  if (f2 == kNoFace) return 0.0;
  const FaceFrame a = face_frame(mesh, t.faces[f1], f1);
  const FaceFrame b = face_frame(mesh, t.faces[f2], f2);
  const double phi = std::acos(std::clamp(a.normal.dot(b.normal), -1.0, 1.0));
  if (!options.signed_dihedral) return phi;

  // Edge direction as traversed by the first face.
  const int k = slot_in_face(t, f1, edge);
  const Face& face = t.faces[f1];
  const Vec3 dir = mesh.vertices[face[(k + 1) % 3]] - mesh.vertices[face[k]];
  return a.normal.cross(b.normal).dot(dir) >= 0.0 ? phi : -phi;
}

FeatureTensor fundamental_forms(const EdgeTopology& t, const Mesh& mesh, const FeatureOptions& options) {
  FeatureTensor out{FeatureKind::kFundamentalForms, Matrix(t.edge_count(), 2)};
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto [u, v] = t.edges[e];
    out.values(e, 0) = (mesh.vertices[u] - mesh.vertices[v]).norm();
    out.values(e, 1) = dihedral_angle(t, mesh, static_cast<int>(e), options);
  }
  return out;
}

FeatureTensor meshcnn5(const EdgeTopology& t, const Mesh& mesh, const FeatureOptions& options) {
  FeatureTensor out{FeatureKind::kMeshCnn5, Matrix(t.edge_count(), 5)};
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto [u, v] = t.edges[e];
    const double len = (mesh.vertices[u] - mesh.vertices[v]).norm();
    // Missing face on a boundary edge contributes zeros.
    std::array<double, 2> opp{0.0, 0.0};
    std::array<double, 2> ratio{0.0, 0.0};
    for (int slot = 0; slot < 2; ++slot) {
      const int f = t.edge_faces[e][slot];
      if (f == kNoFace) continue;
      const FaceFrame frame = face_frame(mesh, t.faces[f], f);
      const Vec3& w = mesh.vertices[opposite_vertex(t.faces[f], slot_in_face(t, f, static_cast<int>(e)))];
      opp[slot] = angle_between(mesh.vertices[u] - w, mesh.vertices[v] - w);
      ratio[slot] = len * len / (2.0 * frame.area);
    }
    if (opp[0] > opp[1]) std::swap(opp[0], opp[1]);
    if (ratio[0] > ratio[1]) std::swap(ratio[0], ratio[1]);
    out.values(e, 0) = dihedral_angle(t, mesh, static_cast<int>(e), options);
    out.values(e, 1) = opp[0];
    out.values(e, 2) = opp[1];
    out.values(e, 3) = ratio[0];
    out.values(e, 4) = ratio[1];
  }
  return out;
}

FeatureTensor coordinate_features(const EdgeTopology& t, const Mesh& mesh, FeatureKind variant) {
  const std::size_t m = t.edge_count();
  FeatureTensor out{variant, Matrix(m, channel_count(variant))};
  switch (variant) {
    case FeatureKind::kXyz:
      for (std::size_t e = 0; e < m; ++e) {
        const auto [u, v] = t.edges[e];
        out.values.row(e) = (0.5 * (mesh.vertices[u] + mesh.vertices[v])).transpose();
      }
      break;
    case FeatureKind::kXyzInvariant:
      for (std::size_t e = 0; e < m; ++e) {
        const auto [u, v] = t.edges[e];
        const Vec3& a = mesh.vertices[u];
        const Vec3& b = mesh.vertices[v];
        out.values(e, 0) = a.dot(b);
        out.values(e, 1) = 0.5 * (a.norm() + b.norm());
      }
      break;
    case FeatureKind::kLaplacian: {
      std::vector<Vec3> delta(t.vertex_count, Vec3::Zero());
      for (std::size_t i = 0; i < t.vertex_count; ++i) {
        const auto& incident = t.vertex_edges[i];
        if (incident.empty()) throw GeometryError("isolated vertex " + std::to_string(i));
        Vec3 sum = Vec3::Zero();
        for (int e : incident) {
          const auto [a, b] = t.edges[e];
          sum += mesh.vertices[a == static_cast<int>(i) ? b : a];
        }
        delta[i] = mesh.vertices[i] - sum / static_cast<double>(incident.size());
      }
      for (std::size_t e = 0; e < m; ++e) {
        const auto [u, v] = t.edges[e];
        out.values.row(e) = (0.5 * (delta[u] + delta[v])).transpose();
      }
      break;
    }
    default:
      throw std::invalid_argument("coordinate_features: not a coordinate kind");
  }
  return out;
}

FeatureTensor compute_features(const EdgeTopology& t, const Mesh& mesh, FeatureKind kind,
                               const FeatureOptions& options) {
  switch (kind) {
    case FeatureKind::kFundamentalForms: return fundamental_forms(t, mesh, options);
    case FeatureKind::kMeshCnn5: return meshcnn5(t, mesh, options);
    default: return coordinate_features(t, mesh, kind);
  }
}

ChannelStats fit_channel_stats(std::span<const Matrix> features) {
  if (features.empty()) throw DataError("no feature tensors to fit statistics on");
  const Eigen::Index c = features.front().cols();
  RowVector sum = RowVector::Zero(c);
  double count = 0.0;
  for (const Matrix& x : features) {
    if (x.cols() != c) throw DataError("channel count differs between feature tensors");
    sum += x.colwise().sum();
    count += static_cast<double>(x.rows());
  }
  if (count == 0.0) throw DataError("no edges to fit statistics on");
  ChannelStats stats;
  stats.mean = sum / count;
  RowVector sq = RowVector::Zero(c);
  for (const Matrix& x : features) {
    sq += (x.rowwise() - stats.mean).array().square().matrix().colwise().sum();
  }
  stats.std = (sq / count).array().sqrt().max(kStdFloor).matrix();
  return stats;
}

ChannelStats fit_channel_stats(std::span<const FeatureTensor> features) {
  std::vector<Matrix> values;
  values.reserve(features.size());
  for (const auto& f : features) values.push_back(f.values);
  return fit_channel_stats(std::span<const Matrix>(values));
}

Matrix normalize(const Matrix& values, const ChannelStats& stats) {
  if (values.cols() != stats.channels()) throw DataError("channel count does not match statistics");
  return ((values.rowwise() - stats.mean).array().rowwise() / stats.std.array()).matrix();
}

Matrix denormalize(const Matrix& values, const ChannelStats& stats) {
  if (values.cols() != stats.channels()) throw DataError("channel count does not match statistics");
  return ((values.array().rowwise() * stats.std.array()).matrix().rowwise() + stats.mean);
}

FeatureTensor normalize(const FeatureTensor& features, const ChannelStats& stats) {
  return {features.kind, normalize(features.values, stats)};
}

FeatureTensor denormalize(const FeatureTensor& features, const ChannelStats& stats) {
  return {features.kind, denormalize(features.values, stats)};
}

std::vector<double> edge_norms(const Matrix& values) {
  std::vector<double> out(values.rows());
  for (Eigen::Index e = 0; e < values.rows(); ++e) out[e] = values.row(e).norm();
  return out;
}

ChannelMask parse_channel_mask(std::string_view bits) {
  ChannelMask mask;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("channel mask must be a 0/1 string");
    mask.push_back(c == '1');
  }
  return mask;
}

void apply_channel_mask(Matrix& values, const ChannelMask& mask) {
  if (mask.empty()) return;
  if (static_cast<Eigen::Index>(mask.size()) != values.cols()) {
    throw std::invalid_argument("channel mask length does not match channel count");
  }
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (!mask[c]) values.col(static_cast<Eigen::Index>(c)).setZero();
  }
}

}  // namespace meshff
