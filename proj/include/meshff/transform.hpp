#pragma once

#include <random>

#include "meshff/mesh.hpp"

namespace meshff {

struct RigidMotion {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double uniform_scale = 1.0;

  static RigidMotion identity() { return {}; }
  /// Rotation about `axis` (need not be unit) by `radians`.
  static RigidMotion axis_angle(const Vec3& axis, double radians);
  /// Haar-uniform rotation from a normalized Gaussian quaternion.
  static RigidMotion random_rotation(std::mt19937_64& rng);
  /// Random rotation plus a translation with components in [-span, span].
  static RigidMotion random(std::mt19937_64& rng, double span);

  bool is_valid(double tol = 1e-12) const;
};

Mesh apply_motion(const Mesh& mesh, const RigidMotion& motion);

/// Centers the axis-aligned bounding box at the origin and scales it so the
/// longest side is 1.
Mesh normalize_unit_box(const Mesh& mesh);

}  // namespace meshff
