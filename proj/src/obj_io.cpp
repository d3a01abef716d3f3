#include "meshff/obj_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "meshff/topology.hpp"

namespace meshff {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, int line) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("malformed coordinate '" + std::string(tok) + "'", line);
  }
  return value;
}

long parse_index(std::string_view tok, int line) {
  // Only the vertex reference before the first '/' matters.
  tok = tok.substr(0, tok.find('/'));
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || value == 0) {
    throw ParseError("malformed face reference '" + std::string(tok) + "'", line);
  }
  return value;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Mesh parse_obj(std::string_view text) {
  Mesh mesh;
  struct PendingFace {
    std::vector<long> refs;
    int line;
  };
  std::vector<PendingFace> pending;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto toks = split_ws(line);
    if (toks[0] == "v") {
      if (toks.size() < 4) throw ParseError("vertex needs 3 coordinates", line_no);
      mesh.vertices.emplace_back(parse_double(toks[1], line_no), parse_double(toks[2], line_no),
                                 parse_double(toks[3], line_no));
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw ParseError("face needs at least 3 vertices", line_no);
      PendingFace face{{}, line_no};
      for (std::size_t i = 1; i < toks.size(); ++i) face.refs.push_back(parse_index(toks[i], line_no));
      pending.push_back(std::move(face));
    }
    if (end == text.size()) break;
  }

  // Faces may reference vertices declared later in the file, so indices are
  // resolved once all vertices are known.
  const long n = static_cast<long>(mesh.vertices.size());
  for (const auto& face : pending) {
    std::vector<int> idx;
    idx.reserve(face.refs.size());
    for (long ref : face.refs) {
      long i = ref > 0 ? ref - 1 : n + ref;
      if (i < 0 || i >= n) {
        throw ParseError("face index " + std::to_string(ref) + " out of range", face.line);
      }
      idx.push_back(static_cast<int>(i));
    }
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
      mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  if (mesh.vertices.empty() || mesh.faces.empty()) {
    throw EmptyMeshError("mesh has no vertices or no faces");
  }
  return mesh;
}

std::string write_obj(const Mesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 20);
  for (const Vec3& v : mesh.vertices) {
    out += "v " + format_number(v.x()) + ' ' + format_number(v.y()) + ' ' +
           format_number(v.z()) + '\n';
  }
  for (const Face& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

ObjExport write_obj(const Mesh& mesh, std::span<const double> edge_values) {
  ObjExport out{write_obj(mesh), std::nullopt};
  if (!edge_values.empty()) {
    out.edge_scalars = write_edge_scalars(build_edge_topology(mesh), edge_values);
  }
  return out;
}

std::string write_edge_scalars(const EdgeTopology& topology, std::span<const double> values) {
  if (values.size() != topology.edge_count()) {
    throw DataError("edge scalar field has " + std::to_string(values.size()) +
                    " values for " + std::to_string(topology.edge_count()) + " edges");
  }
  std::string out;
  for (std::size_t e = 0; e < values.size(); ++e) {
    out += std::to_string(topology.edges[e].first) + ' ' +
           std::to_string(topology.edges[e].second) + ' ' + format_number(values[e]) + '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Mesh read_obj_file(const std::filesystem::path& path) { return parse_obj(read_text_file(path)); }

std::filesystem::path edge_scalar_sidecar_path(const std::filesystem::path& obj_path) {
  auto p = obj_path;
  p.replace_extension(".edges.txt");
  return p;
}

void write_obj_file(const std::filesystem::path& path, const Mesh& mesh,
                    std::span<const double> edge_values) {
  ObjExport text = write_obj(mesh, edge_values);
  write_text_file(path, text.obj);
  if (text.edge_scalars) write_text_file(edge_scalar_sidecar_path(path), *text.edge_scalars);
}

}  // namespace meshff
