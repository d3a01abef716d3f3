#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meshff/mesh.hpp"

namespace meshff::data {

enum class Split { kTrain, kTest };
std::string_view to_string(Split split);

struct LabeledMesh {
  std::string id;
  Mesh mesh;
  std::optional<int> class_label;
  std::optional<std::vector<int>> edge_labels;  // one per edge when present
  Split split = Split::kTrain;
};

using Dataset = std::vector<LabeledMesh>;

enum class GeneratorKind { kPrimitiveZoo, kEngravedCube, kArticulatedLimbs };
std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view name);

// Part labels of articulated-limbs meshes.
inline constexpr int kBodyPart = 0;
inline constexpr int kLimbPart = 1;
inline constexpr int kHeadPart = 2;

inline constexpr int kMaxZooClasses = 6;
inline constexpr int kMaxGlyphClasses = 8;
inline constexpr int kMaxLimbClasses = 4;  // 2..5 limbs

struct DatasetSpec {
  GeneratorKind kind = GeneratorKind::kPrimitiveZoo;
  int classes = 4;
  int per_class = 20;
  int min_edges = 240;
  int max_edges = 480;
  std::uint64_t seed = 0;
};

/// Samples are ordered class by class. Every mesh is normalized to the unit
/// box and validated. Sample k of class c depends only on (seed, c, k).
Dataset generate(const DatasetSpec& spec);

/// One sample; `generate` is this over every (class, index) pair.
LabeledMesh generate_sample(const DatasetSpec& spec, int class_label, int index);

struct AugmentOptions {
  bool random_rotation = false;
  double vertex_jitter_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Optional Haar-random rotation about the origin, then per-vertex jitter.
Mesh augment(const Mesh& mesh, const AugmentOptions& options);

/// I.i.d. Gaussian perturbation of every coordinate with the given variance.
/// Expects a unit-box normalized mesh.
Mesh add_vertex_noise(const Mesh& mesh, double variance, std::uint64_t seed);

/// Stratified by class label (unlabeled samples form one stratum). Returns
/// the selected samples in their original order with `split` assigned; the
/// remainder of each class is dropped.
Dataset split(const Dataset& dataset, int per_class_train, int per_class_test, std::uint64_t seed);

Dataset select(const Dataset& dataset, Split which);

/// Manifest layout: `index.tsv` with columns id, path, class, split,
/// edge_labels (relative paths, `-` for absent), meshes under `meshes/` and
/// edge labels (one integer per line, edge order) under `labels/`.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

/// FNV-1a over ids, labels, splits and mesh data.
std::uint64_t dataset_hash(const Dataset& dataset);

/// Seed for an independent stream derived from `seed` and a tag pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace meshff::data
