#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "meshff/feature_io.hpp"
#include "meshff/features.hpp"
#include "meshff/generators.hpp"
#include "meshff/transform.hpp"
#include "test_support.hpp"

namespace meshff {
namespace {

constexpr double kPi = std::numbers::pi;

Mesh flat_pair() {
  // Two unit equilateral triangles sharing edge (0,1), same winding.
  Mesh m;
  const double h = std::sqrt(3.0) / 2;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, h, 0), Vec3(0.5, -h, 0)};
  m.faces = {{0, 1, 2}, {1, 0, 3}};
  return m;
}

int edge_between(const EdgeTopology& t, int p, int q) {
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    if (t.edges[e] == std::pair<int, int>(std::minmax(p, q))) return static_cast<int>(e);
  }
  return -1;
}

// Independent oracle: angle between unit normals of two explicit triangles.
double normal_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e, const Vec3& f) {
  const Vec3 n1 = (b - a).cross(c - a).normalized();
  const Vec3 n2 = (e - d).cross(f - d).normalized();
  return std::acos(std::clamp(n1.dot(n2), -1.0, 1.0));
}

TEST(Dihedral, FlatPairIsZero) {
  const Mesh m = flat_pair();
  const EdgeTopology t = build_edge_topology(m);
  EXPECT_NEAR(dihedral_angle(t, m, edge_between(t, 0, 1)), 0.0, 1e-15);
}

TEST(Dihedral, PerpendicularFoldIsRightAngle) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1)};
  m.faces = {{0, 1, 2}, {1, 0, 3}};
  const EdgeTopology t = build_edge_topology(m);
  EXPECT_NEAR(dihedral_angle(t, m, edge_between(t, 0, 1)), kPi / 2, 1e-15);
}

TEST(Dihedral, RegularTetrahedronMatchesNormalOracle) {
  const Mesh m = gen::tetrahedron();
  const EdgeTopology t = build_edge_topology(m);
  const double expected = kPi - std::acos(1.0 / 3.0);
  EXPECT_NEAR(expected, 1.9106332362490186, 1e-15);
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto& f1 = m.faces[t.edge_faces[e][0]];
    const auto& f2 = m.faces[t.edge_faces[e][1]];
    const auto& v = m.vertices;
    const double oracle = normal_angle(v[f1[0]], v[f1[1]], v[f1[2]], v[f2[0]], v[f2[1]], v[f2[2]]);
    EXPECT_NEAR(oracle, expected, 1e-12);
    EXPECT_NEAR(dihedral_angle(t, m, static_cast<int>(e)), oracle, 1e-12);
  }
}

TEST(Dihedral, BoundaryEdgeIsZeroAndDegenerateFaceThrows) {
  Mesh m = flat_pair();
  const EdgeTopology t = build_edge_topology(m);
  EXPECT_EQ(dihedral_angle(t, m, edge_between(t, 1, 2)), 0.0);
  m.vertices[2] = Vec3(0.5, 0, 0);  // collinear with (0,1)
  try {
    dihedral_angle(t, m, edge_between(t, 0, 1));
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("face 0"), std::string::npos) << e.what();
  }
}

TEST(Dihedral, SignFollowsConvexity) {
  const Mesh tet = gen::tetrahedron();
  const EdgeTopology tt = build_edge_topology(tet);
  for (std::size_t e = 0; e < tt.edge_count(); ++e) {
    EXPECT_GT(dihedral_angle(tt, tet, static_cast<int>(e), {true}), 0.0);
  }
  // Push the top pole of an octahedron below the equator: its four edges
  // become valleys.
  Mesh oct = gen::octahedron();
  int top = -1;
  for (std::size_t i = 0; i < oct.vertices.size(); ++i) {
    if (oct.vertices[i].z() > 0.5) top = static_cast<int>(i);
  }
  oct.vertices[top] = Vec3(0, 0, -0.3);
  const EdgeTopology to = build_edge_topology(oct);
  for (std::size_t e = 0; e < to.edge_count(); ++e) {
    const auto [p, q] = to.edges[e];
    const double s = dihedral_angle(to, oct, static_cast<int>(e), {true});
    if (p == top || q == top) {
      EXPECT_LT(s, 0.0);
    }
    EXPECT_NEAR(std::abs(s), dihedral_angle(to, oct, static_cast<int>(e)), 1e-15);
  }
}

TEST(FundamentalForms, TetrahedronAndScaling) {
  const Mesh m = gen::tetrahedron();
  const EdgeTopology t = build_edge_topology(m);
  const FeatureTensor ff = fundamental_forms(t, m);
  ASSERT_EQ(ff.values.rows(), 6);
  ASSERT_EQ(ff.values.cols(), 2);
  for (int e = 0; e < 6; ++e) {
    EXPECT_NEAR(ff.values(e, 0), 1.0, 1e-15);
    EXPECT_NEAR(ff.values(e, 1), kPi - std::acos(1.0 / 3.0), 1e-12);
  }
  RigidMotion s;
  s.uniform_scale = 2.0;
  const FeatureTensor ff2 = fundamental_forms(t, apply_motion(m, s));
  EXPECT_LT((ff2.values.col(0) - 2.0 * ff.values.col(0)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((ff2.values.col(1) - ff.values.col(1)).cwiseAbs().maxCoeff(), 1e-12);
  const FeatureTensor flat = fundamental_forms(build_edge_topology(flat_pair()), flat_pair());
  EXPECT_NEAR(flat.values(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(flat.values(0, 1), 0.0, 1e-15);
}

TEST(MeshCnn5, FlatEquilateralPair) {
  const Mesh m = flat_pair();
  const EdgeTopology t = build_edge_topology(m);
  const FeatureTensor f = meshcnn5(t, m);
  const int e = edge_between(t, 0, 1);
  const double expected[5] = {0.0, kPi / 3, kPi / 3, 2 / std::sqrt(3.0), 2 / std::sqrt(3.0)};
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(f.values(e, c), expected[c], 1e-12) << "channel " << c;
}

TEST(MeshCnn5, RightIsoscelesDiagonal) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  const EdgeTopology t = build_edge_topology(m);
  const FeatureTensor f = meshcnn5(t, m);
  const int e = edge_between(t, 0, 2);
  EXPECT_NEAR(f.values(e, 1), kPi / 2, 1e-12);
  EXPECT_NEAR(f.values(e, 2), kPi / 2, 1e-12);
  // length / height: sqrt(2) / (1/sqrt(2)) = 2.
  EXPECT_NEAR(f.values(e, 3), 2.0, 1e-12);
}

TEST(MeshCnn5, IndependentOfFaceOrder) {
  std::mt19937_64 rng(5);
  const Mesh m = gen::random_closed_mesh(rng);
  Mesh rev = m;
  std::reverse(rev.faces.begin(), rev.faces.end());
  const EdgeTopology t1 = build_edge_topology(m);
  const EdgeTopology t2 = build_edge_topology(rev);
  const FeatureTensor f1 = meshcnn5(t1, m);
  const FeatureTensor f2 = meshcnn5(t2, rev);
  for (std::size_t e = 0; e < t1.edge_count(); ++e) {
    const auto [p, q] = t1.edges[e];
    const int e2 = edge_between(t2, p, q);
    EXPECT_LT((f1.values.row(e) - f2.values.row(e2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CoordinateFeatures, MidpointDotNormAndLaplacian) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0)};
  m.faces = {{0, 1, 2}};
  const EdgeTopology t = build_edge_topology(m);
  const int e = edge_between(t, 0, 1);
  const FeatureTensor xyz = coordinate_features(t, m, FeatureKind::kXyz);
  EXPECT_EQ(xyz.values.row(e), (RowVector(3) << 1, 0, 0).finished());
  const FeatureTensor inv = coordinate_features(t, m, FeatureKind::kXyzInvariant);
  EXPECT_EQ(inv.values.row(e), (RowVector(2) << 0, 1).finished());

  // Interior vertex of a flat regular grid has zero Laplacian; on a flat
  // grid with a 6-neighbour fan it is the neighbour average.
  Mesh grid;
  const double h = std::sqrt(3.0) / 2;
  grid.vertices = {Vec3(0, 0, 0),   Vec3(1, 0, 0),  Vec3(0.5, h, 0), Vec3(-0.5, h, 0),
                   Vec3(-1, 0, 0),  Vec3(-0.5, -h, 0), Vec3(0.5, -h, 0)};
  for (int i = 1; i <= 6; ++i) grid.faces.push_back({0, i, i % 6 + 1});
  const EdgeTopology tg = build_edge_topology(grid);
  const FeatureTensor lap = coordinate_features(tg, grid, FeatureKind::kLaplacian);
  // Edge (0,1): delta(0) = 0, delta(1) = v1 - mean(v0, v2, v6) = (1,0,0) - (1/3, 0, 0).
  const int e01 = edge_between(tg, 0, 1);
  EXPECT_NEAR(lap.values(e01, 0), 0.5 * (1.0 - 1.0 / 3.0), 1e-15);
  EXPECT_NEAR(lap.values(e01, 1), 0.0, 1e-15);

  // Topologies built by build_edge_topology never hold isolated vertices,
  // so append one by hand.
  Mesh isolated = m;
  isolated.vertices.push_back(Vec3(9, 9, 9));
  EdgeTopology ti = t;
  ti.vertex_count = 4;
  ti.vertex_edges.emplace_back();
  EXPECT_THROW(coordinate_features(ti, isolated, FeatureKind::kLaplacian), GeometryError);
}

TEST(Invariance, RigidMotionsPreserveInvariantKinds) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 5; ++i) {
    const Mesh m = normalize_unit_box(gen::random_closed_mesh(rng));
    const EdgeTopology t = build_edge_topology(m);
    const RigidMotion r = RigidMotion::random(rng, 3.0);
    const Mesh moved = apply_motion(m, r);
    for (FeatureKind k : {FeatureKind::kFundamentalForms, FeatureKind::kMeshCnn5, FeatureKind::kXyzInvariant}) {
      if (k == FeatureKind::kXyzInvariant) continue;  // depends on the origin; checked below
      const double err = (compute_features(t, m, k).values - compute_features(t, moved, k).values).cwiseAbs().maxCoeff();
      EXPECT_LT(err, 1e-9) << to_string(k);
    }
    RigidMotion rot = RigidMotion::random_rotation(rng);
    const Mesh spun = apply_motion(m, rot);
    EXPECT_LT((compute_features(t, m, FeatureKind::kXyzInvariant).values -
               compute_features(t, spun, FeatureKind::kXyzInvariant).values)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
    for (FeatureKind k : {FeatureKind::kXyz, FeatureKind::kLaplacian}) {
      EXPECT_GT((compute_features(t, m, k).values - compute_features(t, spun, k).values).cwiseAbs().maxCoeff(), 1e-3)
          << to_string(k);
    }
  }
}

TEST(Invariance, ScaleLeavesMeshCnn5Unchanged) {
  std::mt19937_64 rng(19);
  const Mesh m = gen::random_closed_mesh(rng);
  const EdgeTopology t = build_edge_topology(m);
  RigidMotion s;
  s.uniform_scale = 3.5;
  EXPECT_LT((meshcnn5(t, m).values - meshcnn5(t, apply_motion(m, s)).values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ChannelStats, ClosedFormCases) {
  Matrix a(2, 2);
  a << 0, 5, 2, 5;
  const Matrix one[] = {a};
  ChannelStats s = fit_channel_stats(std::span<const Matrix>(one));
  EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(s.std(0), 1.0);
  EXPECT_DOUBLE_EQ(s.mean(1), 5.0);
  EXPECT_DOUBLE_EQ(s.std(1), kStdFloor);

  const Matrix two[] = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0)};
  EXPECT_DOUBLE_EQ(fit_channel_stats(std::span<const Matrix>(two)).mean(0), 2.0);

  Matrix x(2, 2);
  x << 1, 5, 2, 5;
  const Matrix z = normalize(x, s);
  EXPECT_DOUBLE_EQ(z(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 1.0);
  EXPECT_LT((denormalize(z, s) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ChannelMask, ZeroesUnsetChannels) {
  Matrix m = Matrix::Ones(3, 5);
  apply_channel_mask(m, parse_channel_mask("10011"));
  EXPECT_EQ(m.col(1).sum(), 0.0);
  EXPECT_EQ(m.col(2).sum(), 0.0);
  EXPECT_EQ(m.col(0).sum(), 3.0);
  EXPECT_THROW(parse_channel_mask("10a11"), std::invalid_argument);
}

TEST(FeatureIo, RoundTripAndCorruption) {
  std::mt19937_64 rng(23);
  FeatureTensor f{FeatureKind::kMeshCnn5, testing::random_matrix(7, 5, rng)};
  const std::string bytes = serialize_features(f);
  EXPECT_EQ(bytes.size(), 4 + 4 + 8 + 8 + 4 + 7 * 5 * 8u);
  EXPECT_EQ(bytes.substr(0, 4), "MFFT");
  const FeatureTensor back = deserialize_features(bytes);
  EXPECT_EQ(back.kind, f.kind);
  EXPECT_EQ(back.values, f.values);
  EXPECT_THROW(deserialize_features(bytes.substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(deserialize_features(bytes + "x"), DataError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_features(bad), DataError);
}

TEST(Heatmap, EdgeNormsAreRowNorms) {
  Matrix m(2, 2);
  m << 3, 4, 0, 0;
  EXPECT_EQ(edge_norms(m), (std::vector<double>{5.0, 0.0}));
}

}  // namespace
}  // namespace meshff
