#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "meshff/features.hpp"
#include "meshff/topology.hpp"

namespace meshff {

enum class PoolPolicy {
  kEnhanced,     // survivor scores re-queued after every collapse
  kBatchLegacy,  // ranking frozen at entry
};

std::string_view to_string(PoolPolicy policy);
PoolPolicy parse_pool_policy(std::string_view name);  // "enhanced" | "legacy"

/// One edge collapse, in the edge numbering of the pool's input topology.
/// Collapsing e with ring (a, b, c, d) merges b into a and d into c.
struct CollapseRecord {
  int collapsed_edge = kNoEdge;
  std::array<int, 2> surviving{};              // a, c
  std::array<int, 3> removed{};                // e, b, d
  std::array<std::array<int, 3>, 2> source_sets{};  // {a, b, e}, {c, d, e}
};

struct PoolHistory {
  std::vector<CollapseRecord> records;
  std::size_t initial_edge_count = 0;
  std::size_t final_edge_count = 0;
  // survivors[i] is the input-numbering edge that became output row i.
  std::vector<int> survivors;
};

/// Raised when no legal collapse remains before the target is met.
class PoolExhaustedError : public std::runtime_error {
 public:
  PoolExhaustedError(std::size_t achieved, std::size_t target);
  std::size_t achieved() const { return achieved_; }

 private:
  std::size_t achieved_;
};

/// Min-queue of (score, edge) with lazy invalidation: each edge carries a
/// version, and entries stamped with an older version are dropped on pop.
/// Equal scores pop the smaller edge index first.
class ScoreQueue {
 public:
  struct Entry {
    double score;
    int edge;
    std::uint32_t version;
  };

  explicit ScoreQueue(std::size_t edge_count) : versions_(edge_count, 0) {}

  void push(int edge, double score);
  /// Invalidates queued entries of `edge` and queues the new score.
  void update(int edge, double score);
  /// Marks `edge` as gone; its queued entries become stale.
  void invalidate(int edge) { ++versions_[edge]; }
  /// Next live entry, or nothing when the queue is exhausted.
  std::optional<Entry> pop();
  std::uint32_t version(int edge) const { return versions_[edge]; }
  bool empty() const { return heap_.empty(); }

 private:
  struct Later {
    bool operator()(const Entry& x, const Entry& y) const {
      if (x.score != y.score) return x.score > y.score;
      return x.edge > y.edge;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::vector<std::uint32_t> versions_;
};

/// Mutable working copy of a topology plus per-edge features and scores,
/// supporting one edge collapse at a time. Edge, face and vertex ids stay in
/// the input numbering until compact() renumbers the survivors.
class EdgeCollapser {
 public:
  EdgeCollapser(const EdgeTopology& topology, Matrix features,
                std::span<const Vec3> positions = {});

  /// Why collapsing `edge` would be illegal, or nothing if it is legal.
  /// Legal means: edge alive and interior, no boundary edge at either
  /// endpoint, endpoints share exactly two neighbours (link condition), and
  /// no vertex of the two removed triangles drops below valence 3.
  std::optional<std::string> illegal_reason(int edge) const;

  /// Collapses `edge`. Survivor features become the mean of their three
  /// sources and survivor scores the L2 norm of the new features. The merged
  /// vertex sits at the edge midpoint. Throws TopologyError when illegal.
  CollapseRecord collapse(int edge);

  bool alive(int edge) const { return edge_alive_[edge]; }
  double score(int edge) const { return scores_[edge]; }
  const Matrix& features() const { return features_; }
  std::size_t live_edge_count() const { return live_edges_; }
  EdgeRing ring(int edge) const;

  /// Renumbers live elements in increasing input order. `survivors`
  /// receives the input edge id of each output edge.
  EdgeTopology compact_topology(std::vector<int>* survivors = nullptr) const;
  Matrix compact_features() const;
  std::vector<Vec3> compact_positions() const;

 private:
  int slot_of(int face, int edge) const;
  int other_face(int edge, int face) const;
  int valence(int vertex) const { return static_cast<int>(vertex_edges_[vertex].size()); }
  int other_vertex(int edge, int vertex) const;

  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<char> face_alive_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::array<int, 2>> edge_faces_;
  std::vector<char> edge_alive_;
  std::vector<std::vector<int>> vertex_edges_;
  std::vector<char> vertex_alive_;
  std::vector<Vec3> positions_;
  Matrix features_;
  std::vector<double> scores_;
  std::size_t live_edges_ = 0;
};

struct PoolResult {
  Matrix features;
  EdgeTopology topology;
  PoolHistory history;
  std::vector<Vec3> positions;  // empty unless positions were supplied
};

/// Collapses lowest-norm edges until at most `target_edges` remain.
/// Candidates that are illegal when popped are skipped for good.
PoolResult pool(const Matrix& features, const EdgeTopology& topology, std::size_t target_edges,
                PoolPolicy policy = PoolPolicy::kEnhanced, std::span<const Vec3> positions = {});

PoolResult pool_batch_legacy(const Matrix& features, const EdgeTopology& topology,
                             std::size_t target_edges, std::span<const Vec3> positions = {});

/// Gradient of pool's output features with respect to its input features.
/// Selection is treated as constant; each average sends 1/3 to each source.
Matrix pool_backward(const Matrix& upstream, const PoolHistory& history);

/// Restores the pre-pool edge set: removed edges b and d copy their
/// survivor, the collapsed edge takes the mean of the two survivors.
Matrix unpool(const Matrix& features, const PoolHistory& history);
Matrix unpool_backward(const Matrix& upstream, const PoolHistory& history);

/// For every input edge, the 1-based collapse step that removed it, or
/// records.size() + 1 for edges that survived.
std::vector<int> collapse_steps(const PoolHistory& history);

}  // namespace meshff
