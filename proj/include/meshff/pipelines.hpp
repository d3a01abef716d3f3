#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshff/checkpoint.hpp"
#include "meshff/config.hpp"
#include "meshff/datasets.hpp"

namespace meshff::pipe {

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;          // mean training loss
  double train_metric = 0.0;  // accuracy, edge accuracy or normalized MSE
  double learning_rate = 0.0;
};

struct MetricsReport {
  Task task = Task::kClassification;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
  std::vector<EpochRecord> curve;
  std::optional<double> accuracy;
  std::optional<double> soft_edge_accuracy;
  std::optional<double> mse;
  std::optional<double> identity_mse;
  double wall_seconds = 0.0;

  /// One JSON object per line: a header, one line per epoch, one summary.
  /// Wall-clock time is left out so that reruns compare byte for byte.
  std::string to_records() const;
  /// Human-readable summary, including wall-clock time.
  std::string to_table() const;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(int epoch, std::uint64_t step, const std::string& what);
  int epoch() const { return epoch_; }
  std::uint64_t step() const { return step_; }

 private:
  int epoch_;
  std::uint64_t step_;
};

/// Raised when a checkpoint is used for a task it was not trained for.
class TaskMismatchError : public DataError {
 public:
  using DataError::DataError;
};

/// Runs `fn(i)` for i in [0, n) on up to `threads` threads. Work is split
/// into fixed contiguous blocks; the first exception (by index) is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Input channels of the network for this config.
Matrix input_features(const ExperimentConfig& config, const EdgeTopology& topology, const Mesh& mesh);

/// Encoder of MeshConv/InstanceNorm/ReLU blocks with a Pool after the first
/// pool_targets.size() blocks. Classification then averages and applies a
/// Dense layer; per-edge tasks unpool back and end in a MeshConv.
nn::Model build_model(const ExperimentConfig& config, int output_channels);

using Split = data::Split;

struct DenoisePair {
  std::string id;
  Mesh clean;
  Mesh noisy;
  Split split = Split::kTrain;
};

/// Noise for each sample is seeded by (seed, sample id).
std::vector<DenoisePair> make_denoise_pairs(const data::Dataset& dataset, double variance,
                                            std::uint64_t seed);

struct TrainResult {
  nn::Checkpoint checkpoint;
  MetricsReport report;
};

/// Trains on the train split of `dataset` (denoising builds its clean/noisy
/// pairs from it). Channel statistics come from the train split only.
TrainResult train(const ExperimentConfig& config, const data::Dataset& dataset,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

struct EvalOptions {
  int rotations = 0;  // >0: evaluate every mesh under this many random rotations
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Evaluate on the test split of `dataset`.
double evaluate_classification(const nn::Checkpoint& ckpt, const data::Dataset& dataset,
                               const EvalOptions& options = {});
double evaluate_segmentation(const nn::Checkpoint& ckpt, const data::Dataset& dataset,
                             const EvalOptions& options = {});
/// Average over pairs of the mean squared error between the model output
/// (de-normalized) and the clean mesh's target features.
double evaluate_denoising(const nn::Checkpoint& ckpt, std::span<const DenoisePair> pairs, int threads = 1);
/// Same average with the noisy mesh's own features as the prediction.
double identity_baseline(std::span<const DenoisePair> pairs, FeatureKind kind);

// Metric definitions.
double accuracy(std::span<const int> predicted, std::span<const int> labels);
/// Sum of lengths of correctly labeled edges over the total length.
double soft_edge_accuracy(std::span<const int> predicted, std::span<const int> labels,
                          std::span<const double> lengths);
std::vector<int> argmax_rows(const Matrix& scores);

struct AblationRow {
  PoolPolicy policy = PoolPolicy::kEnhanced;
  FeatureKind features = FeatureKind::kFundamentalForms;
  std::uint64_t config_hash = 0;
  std::uint64_t dataset_hash = 0;
  double accuracy = 0.0;
};

/// {legacy, enhanced} x {meshcnn5, ff} classification runs sharing `base`
/// (seed included) and the dataset.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const data::Dataset& dataset,
                                      const std::function<void(const AblationRow&)>& on_row = {});
std::string format_ablation(std::span<const AblationRow> rows);

}  // namespace meshff::pipe
