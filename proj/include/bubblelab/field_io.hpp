#pragma once

#include <filesystem>

#include "bubblelab/lattice.hpp"
#include "json.hpp"

namespace bubblelab {

/// Legacy-VTK STRUCTURED_POINTS (ASCII, 17 significant digits): vector data
/// "u" and integer scalars "kind" (0 outside, 1 interior, 2 boundary).
/// `<stem>.vtk` plus the sidecar `<stem>.json` = meta + {h, dims, origin}.
void write_field(const BallField& u, const std::filesystem::path& stem, nlohmann::ordered_json meta);

/// Reads a field written by write_field. Throws ConfigError on malformed input.
BallField read_field(const std::filesystem::path& vtk);

}  // namespace bubblelab
