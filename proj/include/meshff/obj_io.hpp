#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "meshff/mesh.hpp"

namespace meshff {

struct EdgeTopology;

/// Parses the Wavefront OBJ subset used throughout the project: `v` and `f`
/// records, with polygons fan-triangulated and `/`-separated texture and
/// normal references dropped. Everything else is skipped.
Mesh parse_obj(std::string_view text);

/// Writes `v` and `f` records; coordinates use 17 significant digits so a
/// read-back reproduces them exactly.
std::string write_obj(const Mesh& mesh);

struct ObjExport {
  std::string obj;
  std::optional<std::string> edge_scalars;  // absent when no field was given
};

/// OBJ text plus, for a non-empty per-edge field, the edge-scalar sidecar.
ObjExport write_obj(const Mesh& mesh, std::span<const double> edge_values);

/// One `i j value` line per edge, vertex indices 0-based.
std::string write_edge_scalars(const EdgeTopology& topology,
                               std::span<const double> values);

Mesh read_obj_file(const std::filesystem::path& path);

/// Writes `path` and, when `edge_values` is non-empty, a sidecar next to it
/// (see edge_scalar_sidecar_path). Throws DataError when the field length
/// does not match the edge count.
void write_obj_file(const std::filesystem::path& path, const Mesh& mesh,
                    std::span<const double> edge_values = {});

std::filesystem::path edge_scalar_sidecar_path(const std::filesystem::path& obj_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace meshff
