#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace meshff {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<int, 3>;

// Base for every recoverable data error raised by the library. The CLI maps
// these to the "data error" exit code.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, int line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class EmptyMeshError : public DataError {
 public:
  using DataError::DataError;
};

class TopologyError : public DataError {
 public:
  using DataError::DataError;
};

class GeometryError : public DataError {
 public:
  using DataError::DataError;
};

/// Triangle mesh: vertex positions plus counter-clockwise vertex-index
/// triples. Faces are not validated on construction; see validate_manifold.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

bool operator==(const Mesh& a, const Mesh& b);

}  // namespace meshff
