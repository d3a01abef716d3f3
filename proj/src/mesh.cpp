#include "meshff/mesh.hpp"

namespace meshff {

bool operator==(const Mesh& a, const Mesh& b) {
  if (a.faces != b.faces || a.vertices.size() != b.vertices.size()) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    if (a.vertices[i] != b.vertices[i]) return false;
  }
  return true;
}

}  // namespace meshff
