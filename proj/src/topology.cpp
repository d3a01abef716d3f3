#include "meshff/topology.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

namespace meshff {
namespace {

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

std::uint64_t directed_key(int u, int v) {
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

bool face_indices_ok(const Face& f, std::size_t n) {
  for (int i : f) {
    if (i < 0 || static_cast<std::size_t>(i) >= n) return false;
  }
  return f[0] != f[1] && f[1] != f[2] && f[0] != f[2];
}

}  // namespace

ValidationReport validate_manifold(const Mesh& mesh) {
  ValidationReport report;
  const std::size_t n = mesh.vertices.size();

  std::vector<char> used(n, 0);
  // Ordered map keeps findings in a deterministic order.
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  std::unordered_map<std::uint64_t, int> directed;
  std::map<std::array<int, 3>, int> seen_faces;

  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!face_indices_ok(f, n)) {
      report.bad_faces.push_back(static_cast<int>(fi));
      continue;
    }
    std::array<int, 3> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    if (!seen_faces.emplace(sorted, static_cast<int>(fi)).second) {
      report.duplicate_faces.push_back(static_cast<int>(fi));
    }
    for (int k = 0; k < 3; ++k) {
      int u = f[k];
      int v = f[(k + 1) % 3];
      used[u] = 1;
      edge_faces[{std::min(u, v), std::max(u, v)}].push_back(static_cast<int>(fi));
      ++directed[directed_key(u, v)];
    }
  }

  for (const auto& [edge, faces] : edge_faces) {
    if (faces.size() > 2) {
      report.nonmanifold_edges.push_back(edge);
      continue;
    }
    auto [u, v] = edge;
    if (directed[directed_key(u, v)] > 1 || directed[directed_key(v, u)] > 1) {
      report.orientation_conflicts.push_back(edge);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) report.isolated_vertices.push_back(static_cast<int>(i));
  }
  return report;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (auto [u, v] : nonmanifold_edges) {
    out << "non-manifold edge (" << u << ", " << v << "): more than two incident faces\n";
  }
  for (auto [u, v] : orientation_conflicts) {
    out << "inconsistent orientation on edge (" << u << ", " << v << ")\n";
  }
  for (int i : isolated_vertices) out << "isolated vertex " << i << '\n';
  for (int f : duplicate_faces) out << "duplicate face " << f << '\n';
  for (int f : bad_faces) out << "invalid face " << f << " (index out of range or repeated)\n";
  return out.str();
}

EdgeTopology build_edge_topology(const Mesh& mesh) {
  ValidationReport report = validate_manifold(mesh);
  if (!report.ok()) throw TopologyError(report.to_string());

  EdgeTopology topo;
  topo.vertex_count = mesh.vertices.size();
  topo.faces = mesh.faces;
  topo.face_edges.resize(mesh.faces.size());
  topo.vertex_edges.resize(mesh.vertices.size());

  std::unordered_map<std::uint64_t, int> index;
  index.reserve(mesh.faces.size() * 2);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    for (int k = 0; k < 3; ++k) {
      int u = f[k];
      int v = f[(k + 1) % 3];
      auto [it, inserted] = index.emplace(edge_key(u, v), static_cast<int>(topo.edges.size()));
      if (inserted) {
        topo.edges.emplace_back(std::min(u, v), std::max(u, v));
        topo.edge_faces.push_back({static_cast<int>(fi), kNoFace});
      } else {
        topo.edge_faces[it->second][1] = static_cast<int>(fi);
      }
      topo.face_edges[fi][k] = it->second;
    }
  }

  topo.neighbors.assign(topo.edges.size(), {kNoEdge, kNoEdge, kNoEdge, kNoEdge});
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    for (int slot = 0; slot < 2; ++slot) {
      int f = topo.edge_faces[e][slot];
      if (f == kNoFace) continue;
      const auto& fe = topo.face_edges[f];
      int k = static_cast<int>(std::find(fe.begin(), fe.end(), static_cast<int>(e)) - fe.begin());
      topo.neighbors[e][2 * slot] = fe[(k + 1) % 3];
      topo.neighbors[e][2 * slot + 1] = fe[(k + 2) % 3];
    }
    topo.vertex_edges[topo.edges[e].first].push_back(static_cast<int>(e));
    topo.vertex_edges[topo.edges[e].second].push_back(static_cast<int>(e));
  }
  return topo;
}

std::vector<std::string> check_topology(const EdgeTopology& t) {
  std::vector<std::string> issues;
  auto note = [&](std::size_t e, const std::string& msg) {
    issues.push_back("edge " + std::to_string(e) + ": " + msg);
  };
  const std::size_t m = t.edges.size();
  if (t.edge_faces.size() != m || t.neighbors.size() != m) {
    issues.push_back("per-edge arrays have mismatched lengths");
    return issues;
  }
  for (std::size_t e = 0; e < m; ++e) {
    const auto& ring = t.neighbors[e];
    const bool boundary = t.is_boundary(static_cast<int>(e));
    int valid = 0;
    for (int x : ring) valid += x != kNoEdge;
    if (boundary ? valid != 2 : valid != 4) note(e, "wrong number of ring slots");
    if (!boundary) {
      std::array<int, 4> sorted = ring;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        note(e, "ring has repeated edges");
      }
    }
    for (int x : ring) {
      if (x == kNoEdge) continue;
      if (x < 0 || static_cast<std::size_t>(x) >= m) {
        note(e, "ring index out of range");
        continue;
      }
      const auto& back = t.neighbors[x];
      if (std::find(back.begin(), back.end(), static_cast<int>(e)) == back.end()) {
        note(e, "ring not symmetric with edge " + std::to_string(x));
      }
    }
    for (int slot = 0; slot < 2; ++slot) {
      int f = t.edge_faces[e][slot];
      if (f == kNoFace) continue;
      const auto& fe = t.face_edges[f];
      auto in_face = [&](int x) { return std::find(fe.begin(), fe.end(), x) != fe.end(); };
      if (!in_face(static_cast<int>(e)) || !in_face(ring[2 * slot]) || !in_face(ring[2 * slot + 1])) {
        note(e, "ring pair " + std::to_string(slot) + " not in its incident face");
      }
    }
  }
  for (std::size_t f = 0; f < t.faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int u = t.faces[f][k];
      int v = t.faces[f][(k + 1) % 3];
      auto [a, b] = t.edges[t.face_edges[f][k]];
      if (std::min(u, v) != a || std::max(u, v) != b) {
        issues.push_back("face " + std::to_string(f) + ": edge slot " + std::to_string(k) +
                         " does not join its vertices");
      }
    }
  }
  return issues;
}

long euler_characteristic(const EdgeTopology& t) {
  return static_cast<long>(t.vertex_count) - static_cast<long>(t.edges.size()) +
         static_cast<long>(t.faces.size());
}

}  // namespace meshff
