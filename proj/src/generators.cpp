#include "meshff/generators.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

namespace meshff::gen {
namespace {

constexpr double kPi = std::numbers::pi;

void orient_outward(Mesh& m) {
  if (signed_volume(m) < 0.0) {
    for (Face& f : m.faces) std::swap(f[1], f[2]);
  }
}

// Picks (n, m) with factor * n * m inside [lo, hi].
std::pair<int, int> pick_grid(std::mt19937_64& rng, int lo, int hi, int factor, int n_lo, int n_hi,
                              int m_lo, int m_hi) {
  std::uniform_int_distribution<int> pick_n(n_lo, n_hi);
  for (int attempt = 0; attempt < 400; ++attempt) {
    const int n = pick_n(rng);
    const int m_min = std::max(m_lo, (lo + factor * n - 1) / (factor * n));
    const int m_max = std::min(m_hi, hi / (factor * n));
    if (m_min > m_max) continue;
    std::uniform_int_distribution<int> pick_m(m_min, m_max);
    return {n, pick_m(rng)};
  }
  throw DataError("edge-count range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                  "] is unreachable for this mesh family");
}

}  // namespace

double signed_volume(const Mesh& mesh) {
  double v = 0.0;
  for (const Face& f : mesh.faces) {
    v += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  return v / 6.0;
}

void jitter(Mesh& mesh, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> gauss(0.0, sigma);
  for (Vec3& v : mesh.vertices) {
    const double x = gauss(rng);
    const double y = gauss(rng);
    const double z = gauss(rng);
    v += Vec3(x, y, z);
  }
}

Mesh tetrahedron() {
  const double s = 1.0 / (2.0 * std::sqrt(2.0));
  Mesh m;
  m.vertices = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  orient_outward(m);
  return m;
}

Mesh octahedron() {
  Mesh m;
  m.vertices = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  orient_outward(m);
  return m;
}

Mesh icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  m.vertices = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0),
                Vec3(0, -1, t), Vec3(0, 1, t),  Vec3(0, -1, -t), Vec3(0, 1, -t),
                Vec3(t, 0, -1), Vec3(t, 0, 1),  Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
  for (Vec3& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},   {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  orient_outward(m);
  return m;
}

Mesh icosphere(int subdivisions) {
  Mesh m = icosahedron();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((0.5 * (m.vertices[a] + m.vertices[b])).normalized());
      const int id = static_cast<int>(m.vertices.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> faces;
    faces.reserve(m.faces.size() * 4);
    for (const Face& f : m.faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces = std::move(faces);
  }
  return m;
}

Mesh revolve(const std::vector<std::pair<double, double>>& profile, int segments) {
  if (profile.size() < 3 || segments < 3) throw std::invalid_argument("revolve: profile too short");
  const int rings = static_cast<int>(profile.size()) - 2;
  Mesh m;
  m.vertices.emplace_back(0.0, 0.0, profile.front().second);
  for (int i = 0; i < rings; ++i) {
    const auto [r, z] = profile[i + 1];
    for (int j = 0; j < segments; ++j) {
      const double th = 2.0 * kPi * j / segments;
      m.vertices.emplace_back(r * std::cos(th), r * std::sin(th), z);
    }
  }
  m.vertices.emplace_back(0.0, 0.0, profile.back().second);
  const int top = 0;
  const int bottom = static_cast<int>(m.vertices.size()) - 1;
  auto at = [&](int ring, int seg) { return 1 + ring * segments + (seg % segments); };
  for (int j = 0; j < segments; ++j) m.faces.push_back({top, at(0, j), at(0, j + 1)});
  for (int i = 0; i + 1 < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      const int u0 = at(i, j), u1 = at(i, j + 1), l0 = at(i + 1, j), l1 = at(i + 1, j + 1);
      m.faces.push_back({u0, l0, l1});
      m.faces.push_back({u0, l1, u1});
    }
  }
  for (int j = 0; j < segments; ++j) m.faces.push_back({bottom, at(rings - 1, j + 1), at(rings - 1, j)});
  orient_outward(m);
  return m;
}

Mesh uv_sphere(int segments, int rings) {
  std::vector<std::pair<double, double>> profile;
  for (int k = 0; k <= rings + 1; ++k) {
    const double phi = kPi * k / (rings + 1);
    profile.emplace_back(k == 0 || k == rings + 1 ? 0.0 : 0.5 * std::sin(phi), 0.5 * std::cos(phi));
  }
  return revolve(profile, segments);
}

Mesh cone(int segments, int side_rings, int cap_rings, double radius, double height) {
  std::vector<std::pair<double, double>> profile{{0.0, 0.5 * height}};
  for (int k = 1; k <= side_rings; ++k) {
    const double t = static_cast<double>(k) / side_rings;
    profile.emplace_back(t * radius, 0.5 * height - t * height);
  }
  for (int k = 1; k < cap_rings; ++k) {
    profile.emplace_back(radius * (1.0 - static_cast<double>(k) / cap_rings), -0.5 * height);
  }
  profile.emplace_back(0.0, -0.5 * height);
  return revolve(profile, segments);
}

Mesh cylinder(int segments, int side_rings, int cap_rings, double radius, double height) {
  std::vector<std::pair<double, double>> profile{{0.0, 0.5 * height}};
  for (int k = 1; k <= cap_rings; ++k) profile.emplace_back(radius * k / cap_rings, 0.5 * height);
  for (int k = 1; k <= side_rings; ++k) profile.emplace_back(radius, 0.5 * height - height * k / side_rings);
  for (int k = 1; k < cap_rings; ++k) {
    profile.emplace_back(radius * (1.0 - static_cast<double>(k) / cap_rings), -0.5 * height);
  }
  profile.emplace_back(0.0, -0.5 * height);
  return revolve(profile, segments);
}

Mesh bicone(int segments, int rings, double radius, double height) {
  std::vector<std::pair<double, double>> profile{{0.0, 0.5 * height}};
  for (int k = 1; k <= rings; ++k) {
    const double t = static_cast<double>(k) / (rings + 1);
    profile.emplace_back(radius * (1.0 - std::abs(2.0 * t - 1.0)), 0.5 * height - t * height);
  }
  profile.emplace_back(0.0, -0.5 * height);
  return revolve(profile, segments);
}

Mesh torus(int major_segments, int minor_segments, double major_radius, double minor_radius) {
  Mesh m;
  for (int i = 0; i < major_segments; ++i) {
    const double th = 2.0 * kPi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double ph = 2.0 * kPi * j / minor_segments;
      const double rr = major_radius + minor_radius * std::cos(ph);
      m.vertices.emplace_back(rr * std::cos(th), rr * std::sin(th), minor_radius * std::sin(ph));
    }
  }
  auto at = [&](int i, int j) { return (i % major_segments) * minor_segments + (j % minor_segments); };
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  orient_outward(m);
  return m;
}

Mesh box(int nx, int ny, int nz, double sx, double sy, double sz) {
  const std::array<int, 3> n{nx, ny, nz};
  const std::array<double, 3> size{sx, sy, sz};
  Mesh m;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](std::array<int, 3> key) {
    auto [it, inserted] = index.emplace(key, static_cast<int>(m.vertices.size()));
    if (inserted) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) p[k] = (static_cast<double>(key[k]) / n[k] - 0.5) * size[k];
      m.vertices.push_back(p);
    }
    return it->second;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n[u]; ++i) {
        for (int j = 0; j < n[v]; ++j) {
          auto key = [&](int di, int dj) {
            std::array<int, 3> k{};
            k[axis] = side == 0 ? 0 : n[axis];
            k[u] = i + di;
            k[v] = j + dj;
            return vertex(k);
          };
          const int p00 = key(0, 0), p10 = key(1, 0), p11 = key(1, 1), p01 = key(0, 1);
          // e_u x e_v = +e_axis, so the low side needs reversed winding.
          if (side == 1) {
            m.faces.push_back({p00, p10, p11});
            m.faces.push_back({p00, p11, p01});
          } else {
            m.faces.push_back({p00, p11, p10});
            m.faces.push_back({p00, p01, p11});
          }
        }
      }
    }
  }
  return m;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kSphere: return "sphere";
    case Family::kBox: return "box";
    case Family::kTorus: return "torus";
    case Family::kCone: return "cone";
    case Family::kCylinder: return "cylinder";
    case Family::kBicone: return "bicone";
  }
  return "?";
}

Mesh random_primitive(Family family, std::mt19937_64& rng, int min_edges, int max_edges) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Mesh m;
  switch (family) {
    case Family::kSphere: {
      auto [n, r] = pick_grid(rng, min_edges, max_edges, 3, 6, 20, 3, 40);
      m = uv_sphere(n, r);
      const Vec3 s(0.85 + 0.3 * uni(rng), 0.85 + 0.3 * uni(rng), 0.85 + 0.3 * uni(rng));
      for (Vec3& v : m.vertices) v = v.cwiseProduct(s);
      break;
    }
    case Family::kBox: {
      // 6 * (a*b + b*c + c*a) edges.
      std::vector<std::array<int, 3>> fits;
      for (int a = 1; a <= 12; ++a) {
        for (int b = 1; b <= 12; ++b) {
          for (int c = 1; c <= 12; ++c) {
            const int e = 6 * (a * b + b * c + c * a);
            if (e >= min_edges && e <= max_edges) fits.push_back({a, b, c});
          }
        }
      }
      if (fits.empty()) {
        throw DataError("edge-count range [" + std::to_string(min_edges) + ", " +
                        std::to_string(max_edges) + "] is unreachable for boxes");
      }
      const auto [a, b, c] = fits[rng() % fits.size()];
      m = box(a, b, c, 0.6 + 0.6 * uni(rng), 0.6 + 0.6 * uni(rng), 0.6 + 0.6 * uni(rng));
      break;
    }
    case Family::kTorus: {
      auto [n, r] = pick_grid(rng, min_edges, max_edges, 3, 8, 24, 4, 40);
      m = torus(n, r, 1.0, 0.25 + 0.3 * uni(rng));
      break;
    }
    case Family::kCone: {
      auto [n, r] = pick_grid(rng, min_edges, max_edges, 3, 6, 20, 3, 40);
      const int cap = 1 + r / 3;
      m = cone(n, r + 1 - cap, cap, 0.5, 0.7 + 0.6 * uni(rng));
      break;
    }
    case Family::kCylinder: {
      auto [n, r] = pick_grid(rng, min_edges, max_edges, 3, 6, 20, 3, 40);
      const int cap = 1 + r / 4;
      m = cylinder(n, r + 1 - 2 * cap, cap, 0.4, 0.7 + 0.6 * uni(rng));
      break;
    }
    case Family::kBicone: {
      auto [n, r] = pick_grid(rng, min_edges, max_edges, 3, 6, 20, 3, 40);
      m = bicone(n, r, 0.5, 0.7 + 0.6 * uni(rng));
      break;
    }
  }
  jitter(m, 0.004, rng);
  return m;
}

Mesh random_closed_mesh(std::mt19937_64& rng, int min_edges, int max_edges) {
  const auto family = static_cast<Family>(rng() % kFamilyCount);
  return random_primitive(family, rng, min_edges, max_edges);
}

}  // namespace meshff::gen
