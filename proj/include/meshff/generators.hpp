#pragma once

#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "meshff/mesh.hpp"

namespace meshff::gen {

// Closed, consistently outward-oriented primitive meshes.

Mesh tetrahedron();  // regular, unit edges
Mesh octahedron();
Mesh icosahedron();
Mesh icosphere(int subdivisions);

/// Surface of revolution about z through the profile points (radius, z),
/// listed from top to bottom. First and last points are poles (radius 0).
/// Edge count is 3 * segments * (profile.size() - 2).
Mesh revolve(const std::vector<std::pair<double, double>>& profile, int segments);

Mesh uv_sphere(int segments, int rings);
Mesh cone(int segments, int side_rings, int cap_rings, double radius, double height);
Mesh cylinder(int segments, int side_rings, int cap_rings, double radius, double height);
Mesh bicone(int segments, int rings, double radius, double height);
/// Edge count 3 * major * minor.
Mesh torus(int major_segments, int minor_segments, double major_radius, double minor_radius);
/// Axis-aligned box [-sx/2, sx/2] x ... with nx * ny * nz grid resolution.
/// Edge count 6 * (nx*ny + ny*nz + nz*nx).
Mesh box(int nx, int ny, int nz, double sx, double sy, double sz);

/// Signed enclosed volume; positive for outward orientation.
double signed_volume(const Mesh& mesh);

/// Gaussian jitter of every coordinate, sigma absolute.
void jitter(Mesh& mesh, double sigma, std::mt19937_64& rng);

enum class Family { kSphere, kBox, kTorus, kCone, kCylinder, kBicone };
inline constexpr int kFamilyCount = 6;
std::string_view to_string(Family family);

/// One member of `family` with randomized proportions and tessellation,
/// `min_edges`..`max_edges` edges, and mild jitter. Throws DataError when no
/// tessellation of the family lands in the range.
Mesh random_primitive(Family family, std::mt19937_64& rng, int min_edges, int max_edges);

/// random_primitive of a uniformly drawn family. Used by fuzz tests.
Mesh random_closed_mesh(std::mt19937_64& rng, int min_edges = 150, int max_edges = 600);

}  // namespace meshff::gen
