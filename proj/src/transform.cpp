#include "meshff/transform.hpp"

#include <Eigen/Geometry>

namespace meshff {

RigidMotion RigidMotion::axis_angle(const Vec3& axis, double radians) {
  RigidMotion m;
  m.rotation = Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
  return m;
}

RigidMotion RigidMotion::random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  RigidMotion m;
  m.rotation = q.toRotationMatrix();
  return m;
}

RigidMotion RigidMotion::random(std::mt19937_64& rng, double span) {
  RigidMotion m = random_rotation(rng);
  std::uniform_real_distribution<double> uni(-span, span);
  m.translation = Vec3(uni(rng), uni(rng), uni(rng));
  return m;
}

bool RigidMotion::is_valid(double tol) const {
  const Mat3 gram = rotation.transpose() * rotation;
  return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol && uniform_scale > 0.0;
}

Mesh apply_motion(const Mesh& mesh, const RigidMotion& motion) {
  Mesh out = mesh;
  for (Vec3& v : out.vertices) v = motion.uniform_scale * (motion.rotation * v) + motion.translation;
  return out;
}

Mesh normalize_unit_box(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw GeometryError("cannot normalize a mesh without vertices");
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double extent = (hi - lo).maxCoeff();
  if (!(extent > 0.0)) throw GeometryError("all vertices coincide; bounding box is degenerate");
  const Vec3 center = 0.5 * (lo + hi);
  Mesh out = mesh;
  for (Vec3& v : out.vertices) v = (v - center) / extent;
  return out;
}

}  // namespace meshff
