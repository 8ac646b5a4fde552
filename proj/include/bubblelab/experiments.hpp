#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bubblelab/quadrature.hpp"
#include "json.hpp"

namespace bubblelab {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 2, kExitConfig = 3 };

/// One experiment invocation. `params` holds the command-specific settings;
/// the optional fields override the matching params when set.
struct ExperimentConfig {
  std::string command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::filesystem::path output_dir = ".";
  std::filesystem::path base_dir;  // relative paths inside params resolve here
  std::uint64_t seed = 0;
  int threads = 0;
  std::optional<GridResolution> resolution;
  std::optional<double> h;

  /// {command, params, seed, threads, resolution, h}; throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Config echo embedded in every summary. The output directory is left out
  /// so that runs into different directories stay byte-identical.
  nlohmann::ordered_json echo() const;
  /// File stem for the outputs: params.name, else the command.
  std::string stem() const;
};

struct ExperimentResult {
  int exit_code = kExitOk;
  nlohmann::ordered_json summary;
  std::vector<std::filesystem::path> files;  // written outputs, summary first
  std::string message;                       // error text for exit codes 2 and 3
};

const std::vector<std::string>& command_names();

/// Runs the command and writes `<stem>.json` plus its CSV tables into
/// output_dir. Exit 0 when every check passes, 2 when a check fails or a
/// numerical certification is refused, 3 on configuration errors.
ExperimentResult run(const ExperimentConfig& cfg);

}  // namespace bubblelab
