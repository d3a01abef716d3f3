#include "meshff/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "meshff/generators.hpp"
#include "meshff/hash.hpp"
#include "meshff/obj_io.hpp"
#include "meshff/topology.hpp"
#include "meshff/transform.hpp"

namespace meshff::data {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int edge_count_of(const Mesh& m) { return static_cast<int>(3 * m.faces.size() / 2); }

// Glyph strokes in the unit square of a cube face.
using Polyline = std::vector<std::pair<double, double>>;
std::vector<Polyline> glyph(int cls) {
  switch (cls) {
    case 0: return {{{0.5, 0.15}, {0.5, 0.85}}};
    case 1: return {{{0.15, 0.5}, {0.85, 0.5}}};
    case 2: return {{{0.25, 0.85}, {0.25, 0.25}, {0.8, 0.25}}};
    case 3: return {{{0.2, 0.2}, {0.8, 0.8}}, {{0.2, 0.8}, {0.8, 0.2}}};
    case 4: return {{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.25, 0.25}}};
    case 5: return {{{0.15, 0.8}, {0.85, 0.8}}, {{0.5, 0.8}, {0.5, 0.15}}};
    case 6: return {{{0.5, 0.15}, {0.5, 0.85}}, {{0.15, 0.5}, {0.85, 0.5}}};
    default: return {{{0.5, 0.5}, {0.5, 0.5}}};
  }
}

double segment_distance(double x, double y, std::pair<double, double> a, std::pair<double, double> b) {
  const double dx = b.first - a.first, dy = b.second - a.second;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((x - a.first) * dx + (y - a.second) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x - a.first - t * dx, y - a.second - t * dy);
}

LabeledMesh engraved_cube(int cls, std::mt19937_64& rng, int min_edges, int max_edges) {
  // A unit cube tessellated n x n per face has 18 n^2 edges.
  std::vector<int> fits;
  for (int n = 3; n <= 40; ++n) {
    if (18 * n * n >= min_edges && 18 * n * n <= max_edges) fits.push_back(n);
  }
  if (fits.empty()) {
    throw DataError("edge-count range [" + std::to_string(min_edges) + ", " + std::to_string(max_edges) +
                    "] is unreachable for engraved cubes (18 n^2 edges)");
  }
  const int n = fits[rng() % fits.size()];
  Mesh m = gen::box(n, n, n, 1.0, 1.0, 1.0);
  const int face = static_cast<int>(rng() % 6);
  const int axis = face / 2;
  const double side = face % 2 == 0 ? -0.5 : 0.5;
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  const double depth = 0.12;
  const double reach = 0.6 / n;
  const auto strokes = glyph(cls);
  for (Vec3& p : m.vertices) {
    if (std::abs(p[axis] - side) > 1e-12) continue;
    const double x = p[u] + 0.5, y = p[v] + 0.5;
    if (x < 1e-9 || y < 1e-9 || x > 1 - 1e-9 || y > 1 - 1e-9) continue;  // keep the rim flat
    double d = 1e9;
    for (const Polyline& s : strokes) {
      for (std::size_t i = 0; i + 1 < s.size(); ++i) d = std::min(d, segment_distance(x, y, s[i], s[i + 1]));
    }
    if (d < reach) p[axis] -= (side > 0 ? 1.0 : -1.0) * depth;
  }
  gen::jitter(m, 0.002, rng);
  LabeledMesh out;
  out.mesh = std::move(m);
  out.class_label = cls;
  return out;
}

double bump(double angle, double width) {
  const double t = angle / width;
  if (t >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const double x = g(rng), y = g(rng), z = g(rng);
    Vec3 v(x, y, z);
    if (v.norm() > 1e-6) return v.normalized();
  }
}

LabeledMesh articulated_limbs(int cls, std::mt19937_64& rng, int min_edges, int max_edges) {
  const int limbs = cls + 2;
  const double limb_width = 0.5;
  const double head_width = 0.6;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Vec3 head = (Vec3(0, 0, 1) + 0.15 * random_unit(rng)).normalized();
  std::vector<Vec3> dirs;
  for (int attempt = 0; static_cast<int>(dirs.size()) < limbs; ++attempt) {
    if (attempt > 20000) throw DataError("could not place limbs");
    const Vec3 d = random_unit(rng);
    if (d.z() > 0.35) continue;
    bool ok = std::acos(std::clamp(d.dot(head), -1.0, 1.0)) > limb_width + head_width + 0.15;
    for (const Vec3& o : dirs) ok = ok && std::acos(std::clamp(d.dot(o), -1.0, 1.0)) > 2 * limb_width + 0.15;
    if (ok) dirs.push_back(d);
  }
  std::vector<double> lengths;
  for (int i = 0; i < limbs; ++i) lengths.push_back(0.9 + 0.5 * uni(rng));
  const double head_size = 0.45 + 0.2 * uni(rng);

  int segments = 0, rings = 0;
  std::vector<std::pair<int, int>> fits;
  for (int s = 10; s <= 40; ++s) {
    for (int r = 6; r <= 60; ++r) {
      if (3 * s * r >= min_edges && 3 * s * r <= max_edges) fits.emplace_back(s, r);
    }
  }
  if (fits.empty()) {
    throw DataError("edge-count range [" + std::to_string(min_edges) + ", " + std::to_string(max_edges) +
                    "] is unreachable for articulated limbs");
  }
  std::tie(segments, rings) = fits[rng() % fits.size()];
  Mesh m = gen::uv_sphere(segments, rings);

  auto part_at = [&](const Vec3& dir, double* radius) {
    double r = 1.0;
    double best_limb = 0.0, head_w = 0.0;
    for (int i = 0; i < limbs; ++i) {
      const double w = bump(std::acos(std::clamp(dir.dot(dirs[i]), -1.0, 1.0)), limb_width);
      r += lengths[i] * w;
      best_limb = std::max(best_limb, w);
    }
    head_w = bump(std::acos(std::clamp(dir.dot(head), -1.0, 1.0)), head_width);
    r += head_size * head_w;
    if (radius) *radius = r;
    if (best_limb > 0.08) return kLimbPart;
    if (head_w > 0.08) return kHeadPart;
    return kBodyPart;
  };

  const std::vector<Vec3> dirs_of_vertex = [&] {
    std::vector<Vec3> d;
    for (const Vec3& p : m.vertices) d.push_back(p.normalized());
    return d;
  }();
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    double r = 1.0;
    part_at(dirs_of_vertex[i], &r);
    m.vertices[i] = 0.5 * r * dirs_of_vertex[i];
  }
  const EdgeTopology topo = build_edge_topology(m);
  std::vector<int> labels;
  labels.reserve(topo.edge_count());
  for (const auto& [p, q] : topo.edges) {
    labels.push_back(part_at((dirs_of_vertex[p] + dirs_of_vertex[q]).normalized(), nullptr));
  }
  gen::jitter(m, 0.002, rng);
  LabeledMesh out;
  out.mesh = std::move(m);
  out.class_label = cls;
  out.edge_labels = std::move(labels);
  return out;
}

std::string format_id(GeneratorKind kind, int cls, int index) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s-c%d-%04d", std::string(to_string(kind)).c_str(), cls, index);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, '\t')) out.push_back(cur);
  return out;
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kPrimitiveZoo: return "primitive-zoo";
    case GeneratorKind::kEngravedCube: return "engraved-cube";
    case GeneratorKind::kArticulatedLimbs: return "articulated-limbs";
  }
  return "?";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "primitive-zoo") return GeneratorKind::kPrimitiveZoo;
  if (name == "engraved-cube") return GeneratorKind::kEngravedCube;
  if (name == "articulated-limbs") return GeneratorKind::kArticulatedLimbs;
  throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0x9e3779b97f4a7c15ULL));
}

LabeledMesh generate_sample(const DatasetSpec& spec, int class_label, int index) {
  std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(class_label),
                                  static_cast<std::uint64_t>(index)));
  LabeledMesh s;
  switch (spec.kind) {
    case GeneratorKind::kPrimitiveZoo:
      s.mesh = gen::random_primitive(static_cast<gen::Family>(class_label), rng, spec.min_edges, spec.max_edges);
      s.class_label = class_label;
      break;
    case GeneratorKind::kEngravedCube:
      s = engraved_cube(class_label, rng, spec.min_edges, spec.max_edges);
      break;
    case GeneratorKind::kArticulatedLimbs:
      s = articulated_limbs(class_label, rng, spec.min_edges, spec.max_edges);
      break;
  }
  s.mesh = normalize_unit_box(s.mesh);
  s.id = format_id(spec.kind, class_label, index);
  const ValidationReport report = validate_manifold(s.mesh);
  if (!report.ok()) throw DataError("generated mesh " + s.id + " is not manifold: " + report.to_string());
  const int e = edge_count_of(s.mesh);
  if (e < spec.min_edges || e > spec.max_edges) {
    throw DataError("generated mesh " + s.id + " has " + std::to_string(e) + " edges, outside the range");
  }
  return s;
}

Dataset generate(const DatasetSpec& spec) {
  int max_classes = kMaxZooClasses;
  if (spec.kind == GeneratorKind::kEngravedCube) max_classes = kMaxGlyphClasses;
  if (spec.kind == GeneratorKind::kArticulatedLimbs) max_classes = kMaxLimbClasses;
  if (spec.classes < 1 || spec.classes > max_classes) {
    throw std::invalid_argument(std::string(to_string(spec.kind)) + " supports 1.." +
                                std::to_string(max_classes) + " classes");
  }
  if (spec.per_class < 1) throw std::invalid_argument("per-class sample count must be positive");
  if (spec.min_edges > spec.max_edges || spec.min_edges < 1) {
    throw DataError("edge-count range [" + std::to_string(spec.min_edges) + ", " +
                    std::to_string(spec.max_edges) + "] is empty");
  }
  Dataset out;
  out.reserve(static_cast<std::size_t>(spec.classes * spec.per_class));
  for (int c = 0; c < spec.classes; ++c) {
    for (int k = 0; k < spec.per_class; ++k) out.push_back(generate_sample(spec, c, k));
  }
  return out;
}

Mesh augment(const Mesh& mesh, const AugmentOptions& options) {
  std::mt19937_64 rng(options.seed);
  Mesh out = mesh;
  if (options.random_rotation) {
    RigidMotion r = RigidMotion::random_rotation(rng);
    out = apply_motion(out, r);
  }
  gen::jitter(out, options.vertex_jitter_sigma, rng);
  return out;
}

Mesh add_vertex_noise(const Mesh& mesh, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("noise variance must be a non-negative number");
  }
  Mesh out = mesh;
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(variance));
  for (Vec3& v : out.vertices) {
    const double x = g(rng);
    const double y = g(rng);
    const double z = g(rng);
    v += Vec3(x, y, z);
  }
  return out;
}

Dataset split(const Dataset& dataset, int per_class_train, int per_class_test, std::uint64_t seed) {
  if (per_class_train < 0 || per_class_test < 0) throw std::invalid_argument("split counts must be non-negative");
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < dataset.size(); ++i) strata[dataset[i].class_label.value_or(-1)].push_back(i);
  std::vector<int> role(dataset.size(), -1);
  for (auto& [cls, idx] : strata) {
    const std::size_t need = static_cast<std::size_t>(per_class_train + per_class_test);
    if (idx.size() < need) {
      throw DataError("class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                      " samples, split needs " + std::to_string(need));
    }
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(cls + 1), 0x5011));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    for (std::size_t k = 0; k < need; ++k) role[idx[k]] = k < static_cast<std::size_t>(per_class_train) ? 0 : 1;
  }
  Dataset out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (role[i] < 0) continue;
    out.push_back(dataset[i]);
    out.back().split = role[i] == 0 ? Split::kTrain : Split::kTest;
  }
  return out;
}

Dataset select(const Dataset& dataset, Split which) {
  Dataset out;
  for (const LabeledMesh& s : dataset) {
    if (s.split == which) out.push_back(s);
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "meshes");
  bool any_labels = false;
  for (const LabeledMesh& s : dataset) any_labels = any_labels || s.edge_labels.has_value();
  if (any_labels) fs::create_directories(dir / "labels");
  std::string index = "id\tpath\tclass\tsplit\tedge_labels\n";
  for (const LabeledMesh& s : dataset) {
    const std::string rel = "meshes/" + s.id + ".obj";
    write_text_file(dir / rel, write_obj(s.mesh));
    std::string label_rel = "-";
    if (s.edge_labels) {
      label_rel = "labels/" + s.id + ".labels";
      std::string text;
      for (int l : *s.edge_labels) text += std::to_string(l) + "\n";
      write_text_file(dir / label_rel, text);
    }
    index += s.id + "\t" + rel + "\t" + (s.class_label ? std::to_string(*s.class_label) : "-") + "\t" +
             std::string(to_string(s.split)) + "\t" + label_rel + "\n";
  }
  write_text_file(dir / "index.tsv", index);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const std::string index = read_text_file(dir / "index.tsv");
  std::istringstream in(index);
  std::string line;
  int line_no = 0;
  Dataset out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 5) throw ParseError("index.tsv needs 5 tab-separated columns", line_no);
    LabeledMesh s;
    s.id = cols[0];
    try {
      s.mesh = read_obj_file(dir / cols[1]);
    } catch (const ParseError& e) {
      throw DataError(cols[1] + ": " + e.what());
    }
    if (cols[2] != "-") {
      try {
        s.class_label = std::stoi(cols[2]);
      } catch (const std::exception&) {
        throw ParseError("bad class label '" + cols[2] + "'", line_no);
      }
    }
    if (cols[3] == "train") {
      s.split = Split::kTrain;
    } else if (cols[3] == "test") {
      s.split = Split::kTest;
    } else {
      throw ParseError("split must be train or test", line_no);
    }
    if (cols[4] != "-") {
      std::istringstream labels(read_text_file(dir / cols[4]));
      std::vector<int> v;
      int x = 0;
      while (labels >> x) v.push_back(x);
      if (!labels.eof()) throw DataError(cols[4] + ": malformed edge label");
      const auto topo = build_edge_topology(s.mesh);
      if (v.size() != topo.edge_count()) {
        throw DataError(cols[4] + ": " + std::to_string(v.size()) + " labels for " +
                        std::to_string(topo.edge_count()) + " edges");
      }
      s.edge_labels = std::move(v);
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError((dir / "index.tsv").string() + " lists no samples");
  return out;
}

std::uint64_t dataset_hash(const Dataset& dataset) {
  std::uint64_t h = kFnvOffset;
  for (const LabeledMesh& s : dataset) {
    h = fnv1a64(s.id, h);
    h = fnv1a64(s.class_label ? std::to_string(*s.class_label) : "-", h);
    h = fnv1a64(to_string(s.split), h);
    for (const Vec3& v : s.mesh.vertices) {
      h = fnv1a64(std::string_view(reinterpret_cast<const char*>(v.data()), 3 * sizeof(double)), h);
    }
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(s.mesh.faces.data()),
                                 s.mesh.faces.size() * sizeof(Face)),
                h);
    if (s.edge_labels) {
      h = fnv1a64(std::string_view(reinterpret_cast<const char*>(s.edge_labels->data()),
                                   s.edge_labels->size() * sizeof(int)),
                  h);
    }
  }
  return h;
}

}  // namespace meshff::data
