#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "meshff/features.hpp"
#include "meshff/optimizer.hpp"
#include "meshff/pool.hpp"

namespace meshff {

enum class Task { kClassification, kSegmentation, kDenoising };
std::string_view to_string(Task task);
Task parse_task(std::string_view name);

/// One experiment. Text form is `key = value` lines; `#` starts a comment
/// and unknown keys are rejected. Keys and defaults:
///
///   task            classification | segmentation | denoising
///   features        ff | meshcnn5 | xyz | xyz-inv | laplacian   (ff)
///   channel_mask    bit string over the meshcnn5 channels, empty = all
///   signed_dihedral true | false                                 (false)
///   target          denoising output kind, ff | xyz               (ff)
///   noise_variance  denoising vertex noise variance               (0.1)
///   pool_policy     enhanced | legacy                             (enhanced)
///   conv_widths     comma list of MeshConv widths                 (16,32,32)
///   pool_targets    comma list of edge counts after each block    (180,120)
///   optimizer       adam | sgd                                    (adam)
///   learning_rate   (2e-4), lr_decay (0.1) applied at lr_decay_at (0.75) of epochs
///   momentum        (0.9)
///   epochs          (100)
///   batch           meshes per gradient step                      (8)
///   rotate_train    random rotation augmentation in training     (false)
///   seed            (0)
///   threads         worker threads; results do not depend on it (1)
struct ExperimentConfig {
  Task task = Task::kClassification;
  FeatureKind features = FeatureKind::kFundamentalForms;
  std::string channel_mask;
  bool signed_dihedral = false;
  FeatureKind target = FeatureKind::kFundamentalForms;
  double noise_variance = 0.1;
  PoolPolicy pool_policy = PoolPolicy::kEnhanced;
  std::vector<int> conv_widths{16, 32, 32};
  std::vector<std::uint64_t> pool_targets{180, 120};
  nn::OptimizerMethod optimizer = nn::OptimizerMethod::kAdam;
  double learning_rate = 2e-4;
  double lr_decay = 0.1;
  double lr_decay_at = 0.75;
  double momentum = 0.9;
  int epochs = 100;
  int batch = 8;
  bool rotate_train = false;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  /// Canonical text: every key in the order above. Threads are excluded
  /// since they never change results.
  std::string to_text() const;
  std::uint64_t hash() const;
};

ExperimentConfig parse_config(std::string_view text);

/// Applies one `key=value` override on top of an existing config.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

}  // namespace meshff
