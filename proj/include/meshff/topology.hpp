#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "meshff/mesh.hpp"

namespace meshff {

inline constexpr int kNoEdge = -1;
inline constexpr int kNoFace = -1;

using EdgeRing = std::array<int, 4>;

/// Edge-centric connectivity.
///
/// Edges are numbered in first-appearance order over the face list, where
/// face (v0, v1, v2) contributes (v0,v1), (v1,v2), (v2,v0) in that order.
/// `face_edges[f][k]` is the edge joining faces[f][k] and faces[f][(k+1)%3].
///
/// For an edge at position k of its first incident face F1, the ring is
/// (a, b) = (F1 edge k+1, F1 edge k+2); (c, d) come the same way from the
/// second incident face. Missing slots on boundary edges hold kNoEdge.
struct EdgeTopology {
  std::size_t vertex_count = 0;
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> face_edges;
  std::vector<std::pair<int, int>> edges;     // smaller vertex index first
  std::vector<std::array<int, 2>> edge_faces;  // kNoFace when absent
  std::vector<EdgeRing> neighbors;
  std::vector<std::vector<int>> vertex_edges;

  std::size_t edge_count() const { return edges.size(); }
  bool is_boundary(int edge) const { return edge_faces[edge][1] == kNoFace; }
};

EdgeTopology build_edge_topology(const Mesh& mesh);

struct ValidationReport {
  std::vector<std::pair<int, int>> nonmanifold_edges;   // edges with >2 faces
  std::vector<std::pair<int, int>> orientation_conflicts;  // same direction twice
  std::vector<int> isolated_vertices;
  std::vector<int> duplicate_faces;
  std::vector<int> bad_faces;  // out-of-range or repeated index

  bool ok() const {
    return nonmanifold_edges.empty() && orientation_conflicts.empty() &&
           isolated_vertices.empty() && duplicate_faces.empty() && bad_faces.empty();
  }
  std::string to_string() const;
};

ValidationReport validate_manifold(const Mesh& mesh);

/// Structural self-check of a topology (ring symmetry, slot counts, face
/// membership). Returns human-readable findings; empty means consistent.
std::vector<std::string> check_topology(const EdgeTopology& topology);

/// Closed-surface Euler characteristic V - E + F.
long euler_characteristic(const EdgeTopology& topology);

}  // namespace meshff
