#pragma once

#include <filesystem>
#include <string>

#include "bubblelab/boundary_map.hpp"
#include "json.hpp"

namespace bubblelab {

/// Builds an evaluator from a descriptor {kind, params, patches[]}.
/// Kinds: constant, identity, antipodal, wobble, fold, grid, bubble,
/// squash_cap, patched, plan. Relative grid paths resolve against `dir`.
/// Malformed descriptors throw ConfigError.
MapPtr map_from_json(const nlohmann::ordered_json& j, const std::filesystem::path& dir = {});

/// Reads a descriptor file (JSON). A grid sidecar file is itself a descriptor.
MapPtr load_map(const std::filesystem::path& path);

/// Short names accepted on the command line: constant, identity, antipodal,
/// wobble, fold; anything else is treated as a descriptor path.
MapPtr map_from_name_or_path(const std::string& spec);

/// Writes `<stem>.bin` (n_phi x n_theta x 3 float64, little-endian, row-major)
/// and the sidecar `<stem>.json`; returns the sidecar path.
std::filesystem::path write_grid_map(const GridMap& g, const std::filesystem::path& stem);
GridMap read_grid_map(const std::filesystem::path& sidecar);
GridMap read_grid_map_binary(const std::filesystem::path& bin, int n_phi, int n_theta);

}  // namespace bubblelab
