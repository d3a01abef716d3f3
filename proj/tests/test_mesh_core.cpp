#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include <Eigen/LU>

#include "meshff/generators.hpp"
#include "meshff/obj_io.hpp"
#include "meshff/topology.hpp"
#include "meshff/transform.hpp"
#include "test_support.hpp"

namespace meshff {
namespace {

TEST(ObjIo, ParsesCommentsPolygonsAndReferences) {
  const Mesh m = parse_obj(
      "# square\n"
      "o thing\n"
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "vn 0 0 1\n"
      "f 1/1/1 2/2/1 3/3/1 4/4/1\n");
  ASSERT_EQ(m.vertex_count(), 4u);
  ASSERT_EQ(m.face_count(), 2u);
  EXPECT_EQ(m.faces[0], (Face{0, 1, 2}));
  EXPECT_EQ(m.faces[1], (Face{0, 2, 3}));
}

TEST(ObjIo, NegativeIndicesCountFromTheEnd) {
  const Mesh m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  EXPECT_EQ(m.faces[0], (Face{0, 1, 2}));
}

TEST(ObjIo, MalformedCoordinateReportsLine) {
  try {
    parse_obj("v 0 0 0\nv 1 zero 0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ObjIo, OutOfRangeFaceIndexIsAParseError) {
  EXPECT_THROW(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), ParseError);
}

TEST(ObjIo, EmptyInputsAreRejected) {
  EXPECT_THROW(parse_obj(""), EmptyMeshError);
  EXPECT_THROW(parse_obj("v 0 0 0\n"), EmptyMeshError);
}

TEST(ObjIo, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  const Mesh m = gen::random_closed_mesh(rng);
  EXPECT_EQ(parse_obj(write_obj(m)), m);
}

TEST(ObjIo, EdgeScalarSidecarMatchesEdgeCount) {
  const Mesh m = gen::tetrahedron();
  const std::vector<double> values{1, 2, 3, 4, 5, 6};
  const ObjExport ex = write_obj(m, values);
  ASSERT_TRUE(ex.edge_scalars.has_value());
  EXPECT_EQ(std::count(ex.edge_scalars->begin(), ex.edge_scalars->end(), '\n'), 6);
  const std::vector<double> short_field{1, 2};
  EXPECT_THROW(write_obj(m, short_field), DataError);
  EXPECT_FALSE(write_obj(m, std::span<const double>{}).edge_scalars.has_value());
}

TEST(ObjIo, MissingFileIsADataError) {
  EXPECT_THROW(read_obj_file("/nonexistent/mesh.obj"), DataError);
}

// Brute force: the ring of an interior edge is the other four edges of its
// two faces, and each face contributes one edge per shared endpoint.
TEST(Topology, TetrahedronMatchesBruteForceAdjacency) {
  const Mesh m = gen::tetrahedron();
  const EdgeTopology t = build_edge_topology(m);
  ASSERT_EQ(t.edge_count(), 6u);
  EXPECT_TRUE(check_topology(t).empty());
  EXPECT_EQ(euler_characteristic(t), 2);
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto [p, q] = t.edges[e];
    std::set<std::pair<int, int>> expected;
    int faces_seen = 0;
    for (const Face& f : m.faces) {
      const std::set<int> fv(f.begin(), f.end());
      if (!fv.count(p) || !fv.count(q)) continue;
      ++faces_seen;
      int r = -1;
      for (int v : f) {
        if (v != p && v != q) r = v;
      }
      expected.insert(std::minmax(p, r));
      expected.insert(std::minmax(q, r));
    }
    EXPECT_EQ(faces_seen, 2);
    std::set<std::pair<int, int>> got;
    for (int n : t.neighbors[e]) {
      ASSERT_NE(n, kNoEdge);
      got.insert(t.edges[n]);
    }
    EXPECT_EQ(got, expected) << "edge " << e;
    // a and b come from the same face, as do c and d.
    const auto& ring = t.neighbors[e];
    auto shares_face = [&](int x, int y) {
      for (const auto& fe : t.face_edges) {
        const bool hx = std::find(fe.begin(), fe.end(), x) != fe.end();
        const bool hy = std::find(fe.begin(), fe.end(), y) != fe.end();
        const bool he = std::find(fe.begin(), fe.end(), static_cast<int>(e)) != fe.end();
        if (hx && hy && he) return true;
      }
      return false;
    };
    EXPECT_TRUE(shares_face(ring[0], ring[1]));
    EXPECT_TRUE(shares_face(ring[2], ring[3]));
  }
}

TEST(Topology, EdgesFollowFirstAppearanceOrder) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  m.faces = {{0, 1, 2}, {2, 1, 3}};
  const EdgeTopology t = build_edge_topology(m);
  ASSERT_EQ(t.edge_count(), 5u);
  EXPECT_EQ(t.edges[0], std::make_pair(0, 1));
  EXPECT_EQ(t.edges[1], std::make_pair(1, 2));
  EXPECT_EQ(t.edges[2], std::make_pair(0, 2));
  EXPECT_EQ(t.edges[3], std::make_pair(1, 3));
  EXPECT_EQ(t.edges[4], std::make_pair(2, 3));
  EXPECT_FALSE(t.is_boundary(1));
  EXPECT_TRUE(t.is_boundary(0));
  EXPECT_EQ(t.neighbors[0][2], kNoEdge);
  EXPECT_EQ(t.neighbors[0][3], kNoEdge);
  EXPECT_TRUE(check_topology(t).empty());
}

TEST(Topology, ClosedGeneratorsAreConsistent) {
  const std::vector<std::pair<Mesh, long>> cases = {
      {gen::tetrahedron(), 2},   {gen::octahedron(), 2},           {gen::icosahedron(), 2},
      {gen::icosphere(2), 2},    {gen::uv_sphere(8, 5), 2},        {gen::cone(10, 4, 2, 0.5, 1.0), 2},
      {gen::cylinder(9, 3, 2, 0.4, 1.0), 2}, {gen::bicone(7, 5, 0.5, 1.0), 2}, {gen::torus(12, 8, 1.0, 0.3), 0},
      {gen::box(2, 3, 4, 1.0, 1.5, 2.0), 2},
  };
  for (const auto& [m, chi] : cases) {
    ASSERT_TRUE(validate_manifold(m).ok()) << validate_manifold(m).to_string();
    const EdgeTopology t = build_edge_topology(m);
    EXPECT_TRUE(check_topology(t).empty());
    EXPECT_EQ(euler_characteristic(t), chi);
    EXPECT_GT(gen::signed_volume(m), 0.0);
    for (std::size_t e = 0; e < t.edge_count(); ++e) EXPECT_FALSE(t.is_boundary(static_cast<int>(e)));
  }
}

TEST(Topology, GeneratorEdgeCountFormulas) {
  EXPECT_EQ(build_edge_topology(gen::uv_sphere(8, 5)).edge_count(), 3u * 8 * 5);
  EXPECT_EQ(build_edge_topology(gen::torus(12, 8, 1.0, 0.3)).edge_count(), 3u * 12 * 8);
  EXPECT_EQ(build_edge_topology(gen::box(2, 3, 4, 1, 1, 1)).edge_count(), 6u * (6 + 12 + 8));
  EXPECT_EQ(build_edge_topology(gen::icosahedron()).edge_count(), 30u);
}

TEST(Validation, DetectsNonManifoldEdge) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}};
  const ValidationReport r = validate_manifold(m);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.nonmanifold_edges.size(), 1u);
  EXPECT_EQ(r.nonmanifold_edges[0], std::make_pair(0, 1));
  EXPECT_NE(r.to_string().find("0"), std::string::npos);
  EXPECT_THROW(build_edge_topology(m), TopologyError);
}

TEST(Validation, DetectsOrientationConflictAndDegenerateInput) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(5, 5, 5)};
  m.faces = {{0, 1, 2}, {1, 2, 3}};
  ValidationReport r = validate_manifold(m);
  EXPECT_EQ(r.orientation_conflicts.size(), 1u);
  EXPECT_EQ(r.isolated_vertices, std::vector<int>{4});

  m.faces = {{0, 1, 2}, {0, 1, 2}};
  EXPECT_FALSE(validate_manifold(m).duplicate_faces.empty());
  m.faces = {{0, 0, 2}};
  EXPECT_FALSE(validate_manifold(m).bad_faces.empty());
}

TEST(Transform, RandomRotationsAreProperOrthonormal) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const RigidMotion r = RigidMotion::random(rng, 2.0);
    EXPECT_TRUE(r.is_valid());
    EXPECT_NEAR(r.rotation.determinant(), 1.0, 1e-12);
    EXPECT_LT((r.rotation * r.rotation.transpose() - Mat3::Identity()).norm(), 1e-12);
  }
}

TEST(Transform, AxisAngleMatchesClosedForm) {
  const RigidMotion r = RigidMotion::axis_angle(Vec3(0, 0, 2), std::acos(-1.0) / 2);
  EXPECT_LT((r.rotation * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
}

TEST(Transform, UnitBoxNormalization) {
  Mesh m = gen::box(1, 1, 1, 2.0, 4.0, 1.0);
  for (Vec3& v : m.vertices) v += Vec3(3, -2, 7);
  const Mesh n = normalize_unit_box(m);
  Vec3 lo = n.vertices[0], hi = n.vertices[0];
  for (const Vec3& v : n.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  EXPECT_NEAR((hi - lo).maxCoeff(), 1.0, 1e-15);
  EXPECT_LT((hi + lo).norm(), 1e-15);
  Mesh flat = m;
  for (Vec3& v : flat.vertices) v = Vec3(1, 1, 1);
  EXPECT_THROW(normalize_unit_box(flat), GeometryError);
}

}  // namespace
}  // namespace meshff
