#include "meshff/pool.hpp"

#include <algorithm>

namespace meshff {
namespace {

void erase_value(std::vector<int>& v, int x) {
  v.erase(std::remove(v.begin(), v.end(), x), v.end());
}

}  // namespace

std::string_view to_string(PoolPolicy policy) {
  return policy == PoolPolicy::kEnhanced ? "enhanced" : "legacy";
}

PoolPolicy parse_pool_policy(std::string_view name) {
  if (name == "enhanced") return PoolPolicy::kEnhanced;
  if (name == "legacy" || name == "batch_legacy") return PoolPolicy::kBatchLegacy;
  throw std::invalid_argument("unknown pooling policy '" + std::string(name) + "'");
}

PoolExhaustedError::PoolExhaustedError(std::size_t achieved, std::size_t target)
    : std::runtime_error("no legal collapse left: reached " + std::to_string(achieved) +
                         " edges, target " + std::to_string(target)),
      achieved_(achieved) {}

// --- ScoreQueue ------------------------------------------------------------

void ScoreQueue::push(int edge, double score) { heap_.push({score, edge, versions_[edge]}); }

void ScoreQueue::update(int edge, double score) {
  ++versions_[edge];
  push(edge, score);
}

std::optional<ScoreQueue::Entry> ScoreQueue::pop() {
  while (!heap_.empty()) {
    Entry top = heap_.top();
    heap_.pop();
    if (top.version == versions_[top.edge]) return top;
  }
  return std::nullopt;
}

// --- EdgeCollapser ---------------------------------------------------------

EdgeCollapser::EdgeCollapser(const EdgeTopology& t, Matrix features, std::span<const Vec3> positions)
    : faces_(t.faces),
      face_edges_(t.face_edges),
      face_alive_(t.faces.size(), 1),
      edges_(t.edges),
      edge_faces_(t.edge_faces),
      edge_alive_(t.edges.size(), 1),
      vertex_edges_(t.vertex_edges),
      vertex_alive_(t.vertex_count, 1),
      positions_(positions.begin(), positions.end()),
      features_(std::move(features)),
      live_edges_(t.edges.size()) {
  if (static_cast<std::size_t>(features_.rows()) != t.edge_count()) {
    throw std::invalid_argument("pool: feature rows do not match edge count");
  }
  if (!positions_.empty() && positions_.size() != t.vertex_count) {
    throw std::invalid_argument("pool: position count does not match vertex count");
  }
  scores_ = edge_norms(features_);
}

int EdgeCollapser::slot_of(int face, int edge) const {
  const auto& fe = face_edges_[face];
  for (int k = 0; k < 3; ++k) {
    if (fe[k] == edge) return k;
  }
  throw TopologyError("edge " + std::to_string(edge) + " is not on face " + std::to_string(face));
}

int EdgeCollapser::other_face(int edge, int face) const {
  const auto& ef = edge_faces_[edge];
  return ef[0] == face ? ef[1] : ef[0];
}

int EdgeCollapser::other_vertex(int edge, int vertex) const {
  const auto [u, v] = edges_[edge];
  return u == vertex ? v : u;
}

EdgeRing EdgeCollapser::ring(int edge) const {
  EdgeRing r{kNoEdge, kNoEdge, kNoEdge, kNoEdge};
  for (int slot = 0; slot < 2; ++slot) {
    const int f = edge_faces_[edge][slot];
    if (f == kNoFace) continue;
    const int k = slot_of(f, edge);
    r[2 * slot] = face_edges_[f][(k + 1) % 3];
    r[2 * slot + 1] = face_edges_[f][(k + 2) % 3];
  }
  return r;
}

std::optional<std::string> EdgeCollapser::illegal_reason(int edge) const {
  if (edge < 0 || static_cast<std::size_t>(edge) >= edges_.size()) return "edge index out of range";
  if (!edge_alive_[edge]) return "edge already removed";
  if (edge_faces_[edge][1] == kNoFace) return "boundary edge";
  const auto [p, q] = edges_[edge];
  for (int v : {p, q}) {
    for (int x : vertex_edges_[v]) {
      if (edge_faces_[x][1] == kNoFace) return "endpoint lies on the boundary";
    }
  }

  const int f1 = edge_faces_[edge][0];
  const int f2 = edge_faces_[edge][1];
  const int w1 = faces_[f1][(slot_of(f1, edge) + 2) % 3];
  const int w2 = faces_[f2][(slot_of(f2, edge) + 2) % 3];

  int common = 0;
  for (int x : vertex_edges_[p]) {
    const int n = other_vertex(x, p);
    if (n == q) continue;
    for (int y : vertex_edges_[q]) {
      if (other_vertex(y, q) == n) {
        ++common;
        break;
      }
    }
  }
  if (common != 2) return "link condition violated (endpoints share " + std::to_string(common) + " neighbours)";
  if (valence(w1) <= 3 || valence(w2) <= 3) return "opposite vertex would drop below valence 3";
  if (valence(p) + valence(q) - 4 < 3) return "merged vertex would drop below valence 3";
  return std::nullopt;
}

CollapseRecord EdgeCollapser::collapse(int e) {
  if (auto why = illegal_reason(e)) {
    throw TopologyError("cannot collapse edge " + std::to_string(e) + ": " + *why);
  }
  const int f1 = edge_faces_[e][0];
  const int f2 = edge_faces_[e][1];
  const int k1 = slot_of(f1, e);
  const int k2 = slot_of(f2, e);
  const int a = face_edges_[f1][(k1 + 1) % 3];
  const int b = face_edges_[f1][(k1 + 2) % 3];
  const int c = face_edges_[f2][(k2 + 1) % 3];
  const int d = face_edges_[f2][(k2 + 2) % 3];
  const int p = faces_[f1][k1];
  const int q = faces_[f1][(k1 + 1) % 3];
  const int keep = std::min(p, q);
  const int drop = std::max(p, q);

  // Survivor features from the pre-collapse values.
  const RowVector new_a = (features_.row(a) + features_.row(b) + features_.row(e)) / 3.0;
  const RowVector new_c = (features_.row(c) + features_.row(d) + features_.row(e)) / 3.0;
  features_.row(a) = new_a;
  features_.row(c) = new_c;
  scores_[a] = new_a.norm();
  scores_[c] = new_c.norm();

  // b's outer face now borders a, d's outer face now borders c.
  const int gb = other_face(b, f1);
  const int gd = other_face(d, f2);
  face_edges_[gb][slot_of(gb, b)] = a;
  face_edges_[gd][slot_of(gd, d)] = c;
  edge_faces_[a][edge_faces_[a][0] == f1 ? 0 : 1] = gb;
  edge_faces_[c][edge_faces_[c][0] == f2 ? 0 : 1] = gd;

  face_alive_[f1] = face_alive_[f2] = 0;
  for (int x : {e, b, d}) {
    edge_alive_[x] = 0;
    const auto [u, v] = edges_[x];
    erase_value(vertex_edges_[u], x);
    erase_value(vertex_edges_[v], x);
  }
  live_edges_ -= 3;

  // Move everything attached to `drop` onto `keep`.
  for (int x : vertex_edges_[drop]) {
    for (int f : edge_faces_[x]) {
      if (f == kNoFace || !face_alive_[f]) continue;
      for (int& v : faces_[f]) {
        if (v == drop) v = keep;
      }
    }
    auto& [u, v] = edges_[x];
    if (u == drop) u = keep;
    if (v == drop) v = keep;
    if (u > v) std::swap(u, v);
    vertex_edges_[keep].push_back(x);
  }
  vertex_edges_[drop].clear();
  vertex_alive_[drop] = 0;
  if (!positions_.empty()) positions_[keep] = 0.5 * (positions_[p] + positions_[q]);

  CollapseRecord rec;
  rec.collapsed_edge = e;
  rec.surviving = {a, c};
  rec.removed = {e, b, d};
  rec.source_sets = {{{a, b, e}, {c, d, e}}};
  return rec;
}

EdgeTopology EdgeCollapser::compact_topology(std::vector<int>* survivors) const {
  std::vector<int> vmap(vertex_alive_.size(), -1);
  std::vector<int> emap(edges_.size(), -1);
  std::vector<int> fmap(faces_.size(), -1);
  EdgeTopology t;
  for (std::size_t v = 0; v < vertex_alive_.size(); ++v) {
    if (vertex_alive_[v]) vmap[v] = static_cast<int>(t.vertex_count++);
  }
  if (survivors) survivors->clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!edge_alive_[e]) continue;
    emap[e] = static_cast<int>(t.edges.size());
    t.edges.emplace_back(vmap[edges_[e].first], vmap[edges_[e].second]);
    if (survivors) survivors->push_back(static_cast<int>(e));
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!face_alive_[f]) continue;
    fmap[f] = static_cast<int>(t.faces.size());
    const Face& src = faces_[f];
    t.faces.push_back({vmap[src[0]], vmap[src[1]], vmap[src[2]]});
    const auto& fe = face_edges_[f];
    t.face_edges.push_back({emap[fe[0]], emap[fe[1]], emap[fe[2]]});
  }
  t.edge_faces.reserve(t.edges.size());
  t.neighbors.reserve(t.edges.size());
  t.vertex_edges.assign(t.vertex_count, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!edge_alive_[e]) continue;
    const auto& ef = edge_faces_[e];
    t.edge_faces.push_back({ef[0] == kNoFace ? kNoFace : fmap[ef[0]],
                            ef[1] == kNoFace ? kNoFace : fmap[ef[1]]});
    EdgeRing r = ring(static_cast<int>(e));
    for (int& x : r) {
      if (x != kNoEdge) x = emap[x];
    }
    t.neighbors.push_back(r);
    const int id = emap[e];
    t.vertex_edges[t.edges[id].first].push_back(id);
    t.vertex_edges[t.edges[id].second].push_back(id);
  }
  return t;
}

Matrix EdgeCollapser::compact_features() const {
  Matrix out(static_cast<Eigen::Index>(live_edges_), features_.cols());
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_alive_[e]) out.row(row++) = features_.row(static_cast<Eigen::Index>(e));
  }
  return out;
}

std::vector<Vec3> EdgeCollapser::compact_positions() const {
  std::vector<Vec3> out;
  if (positions_.empty()) return out;
  for (std::size_t v = 0; v < vertex_alive_.size(); ++v) {
    if (vertex_alive_[v]) out.push_back(positions_[v]);
  }
  return out;
}

// --- pooling ---------------------------------------------------------------

PoolResult pool(const Matrix& features, const EdgeTopology& topology, std::size_t target_edges,
                PoolPolicy policy, std::span<const Vec3> positions) {
  EdgeCollapser work(topology, features, positions);
  const std::size_t m = topology.edge_count();
  ScoreQueue queue(m);
  for (std::size_t e = 0; e < m; ++e) queue.push(static_cast<int>(e), work.score(static_cast<int>(e)));

  PoolHistory history;
  history.initial_edge_count = m;
  while (work.live_edge_count() > target_edges) {
    auto top = queue.pop();
    if (!top) throw PoolExhaustedError(work.live_edge_count(), target_edges);
    const int e = top->edge;
    if (!work.alive(e) || work.illegal_reason(e)) continue;
    CollapseRecord rec = work.collapse(e);
    for (int x : rec.removed) queue.invalidate(x);
    if (policy == PoolPolicy::kEnhanced) {
      for (int s : rec.surviving) queue.update(s, work.score(s));
    }
    history.records.push_back(rec);
  }

  PoolResult result;
  result.topology = work.compact_topology(&history.survivors);
  result.features = work.compact_features();
  result.positions = work.compact_positions();
  history.final_edge_count = work.live_edge_count();
  result.history = std::move(history);
  return result;
}

PoolResult pool_batch_legacy(const Matrix& features, const EdgeTopology& topology,
                             std::size_t target_edges, std::span<const Vec3> positions) {
  return pool(features, topology, target_edges, PoolPolicy::kBatchLegacy, positions);
}

Matrix pool_backward(const Matrix& upstream, const PoolHistory& h) {
  if (static_cast<std::size_t>(upstream.rows()) != h.final_edge_count) {
    throw std::invalid_argument("pool backward: gradient rows do not match pooled edge count");
  }
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(h.initial_edge_count), upstream.cols());
  for (std::size_t i = 0; i < h.survivors.size(); ++i) g.row(h.survivors[i]) = upstream.row(i);
  for (auto it = h.records.rbegin(); it != h.records.rend(); ++it) {
    const auto [a, c] = it->surviving;
    const auto [e, b, d] = it->removed;
    const RowVector ga = g.row(a) / 3.0;
    const RowVector gc = g.row(c) / 3.0;
    g.row(a) = ga;
    g.row(b) = ga;
    g.row(c) = gc;
    g.row(d) = gc;
    g.row(e) = ga + gc;
  }
  return g;
}

Matrix unpool(const Matrix& features, const PoolHistory& h) {
  if (static_cast<std::size_t>(features.rows()) != h.final_edge_count ||
      h.survivors.size() != h.final_edge_count) {
    throw DataError("unpool: " + std::to_string(features.rows()) + " feature rows but history ends at " +
                    std::to_string(h.final_edge_count) + " edges");
  }
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(h.initial_edge_count), features.cols());
  for (std::size_t i = 0; i < h.survivors.size(); ++i) x.row(h.survivors[i]) = features.row(i);
  for (auto it = h.records.rbegin(); it != h.records.rend(); ++it) {
    const auto [a, c] = it->surviving;
    const auto [e, b, d] = it->removed;
    x.row(b) = x.row(a);
    x.row(d) = x.row(c);
    x.row(e) = 0.5 * (x.row(a) + x.row(c));
  }
  return x;
}

Matrix unpool_backward(const Matrix& upstream, const PoolHistory& h) {
  if (static_cast<std::size_t>(upstream.rows()) != h.initial_edge_count) {
    throw std::invalid_argument("unpool backward: gradient rows do not match restored edge count");
  }
  Matrix g = upstream;
  // Forward replay ran records last-to-first, so the reverse pass runs
  // first-to-last.
  for (const CollapseRecord& rec : h.records) {
    const auto [a, c] = rec.surviving;
    const auto [e, b, d] = rec.removed;
    g.row(a) += g.row(b) + 0.5 * g.row(e);
    g.row(c) += g.row(d) + 0.5 * g.row(e);
  }
  Matrix out(static_cast<Eigen::Index>(h.final_edge_count), upstream.cols());
  for (std::size_t i = 0; i < h.survivors.size(); ++i) out.row(i) = g.row(h.survivors[i]);
  return out;
}

std::vector<int> collapse_steps(const PoolHistory& h) {
  std::vector<int> step(h.initial_edge_count, static_cast<int>(h.records.size()) + 1);
  for (std::size_t i = 0; i < h.records.size(); ++i) {
    for (int x : h.records[i].removed) step[x] = static_cast<int>(i) + 1;
  }
  return step;
}

}  // namespace meshff
