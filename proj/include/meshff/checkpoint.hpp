#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "meshff/features.hpp"
#include "meshff/model.hpp"

namespace meshff::nn {

/// Everything needed to re-run a trained model.
///
/// Binary layout, little-endian, strings and matrices length-prefixed:
///   char[4] "MFCK", u32 version (1)
///   string  config text, u64 config hash
///   u32 pool policy (0 enhanced, 1 legacy)
///   u64 layer count, then per layer: u32 type, i32 in, i32 out, u64 target
///   u64 parameter count, then per block: string name, matrix
///   u8 has_input_stats  [matrix mean (1xC), matrix std (1xC)]
///   u8 has_target_stats [matrix mean, matrix std]
/// where a matrix is u64 rows, u64 cols, rows*cols f64 row-major.
struct Checkpoint {
  std::string config_text;
  std::uint64_t config_hash = 0;
  Model model;
  std::optional<ChannelStats> input_stats;
  std::optional<ChannelStats> target_stats;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace meshff::nn
