#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/experiments.hpp"
#include "bubblelab/kernels.hpp"
#include "bubblelab/output.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace bubblelab;

namespace {

enum class Kind { text, path, integer, number, int_list, number_list, int_or_auto, number_or_auto, map, flag };

struct FlagSpec {
  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
};

struct SubcommandSpec {
  std::string name;
  std::string help;
  std::vector<FlagSpec> flags;
};

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> specs = {
      {"construct",
       "Antipodal pair, squash caps and N bubble pairs on a degree-zero base map",
       {{"--base-map", "base_map", Kind::map, "base map: constant|identity|antipodal|wobble|fold or a descriptor path"},
        {"--q", "q", Kind::number_list, "antipodal axis (3 numbers); searched when omitted"},
        {"--N", "N", Kind::integer, "bubble pairs (0: only the squash caps)"},
        {"--j", "j", Kind::int_or_auto, "bubble scale index or 'auto'"},
        {"--delta", "delta", Kind::number_or_auto, "cap radius (chordal) or 'auto'"},
        {"--eps", "eps", Kind::number, "target H1 distance for delta selection"},
        {"--profile", "profile", Kind::text, "stereographic|cone"},
        {"--chain-p", "chain_p", Kind::number_list, "exponents for the W1p budget chain"},
        {"--h1-deltas", "h1_deltas", Kind::number_list, "cap radii for the H1 bound check"}}},
      {"energy",
       "Boundary energy, image area and degree integral of a map",
       {{"--map", "map", Kind::map, "map name or descriptor path"},
        {"--compare", "compare", Kind::map, "second map for W1p distances"},
        {"--p", "p", Kind::number_list, "exponents for --compare"}}},
      {"degree",
       "Degree by integral and by signed preimage counting",
       {{"--map", "map", Kind::map, "map name or descriptor path"}}},
      {"minimize",
       "Multi-start projected Gauss-Seidel on the ball lattice",
       {{"--boundary", "boundary", Kind::map, "boundary map name, descriptor or plan path"},
        {"--restarts", "restarts", Kind::integer, "number of starts (radial first, then random)"},
        {"--max-sweeps", "max_sweeps", Kind::integer, "sweep limit per start"},
        {"--rel-tol", "rel_tol", Kind::number, "relative energy decrease stopping threshold"},
        {"--warm-start", "warm_start", Kind::path, "VTK field replacing the radial start"},
        {"--detect", "detect", Kind::flag, "run defect detection on every start"},
        {"--coarea-grid", "coarea_grid", Kind::text, "fiber grid (e.g. 16x32) for the co-area check"}}},
      {"detect",
       "Cell degrees and defect list of an exported field",
       {{"--field", "field", Kind::path, "VTK field (default: <output>/minimize_field.vtk)"},
        {"--map", "map", Kind::map, "boundary map, for the degree cross-check"}}},
      {"verify-lemma34",
       "I1/I2 closed forms against quadrature and measured bubble seminorms",
       {{"--p", "p", Kind::number_list, "exponents, comma separated"}, {"--j", "j", Kind::int_list, "scale indices, comma separated"}}},
      {"verify-coarea",
       "Dirichlet energy against twice the integrated fiber length",
       {{"--field", "field", Kind::path, "VTK field"},
        {"--synthetic", "synthetic", Kind::text, "radial|antiradial|constant"},
        {"--fiber-grid", "fiber_grid", Kind::text, "fiber quadrature grid, e.g. 16x32"},
        {"--mode", "mode", Kind::text, "equality|inequality"}}},
      {"verify-caps",
       "Energy and image area of single bubbles on their 1/j caps",
       {{"--j", "j", Kind::int_list, "scale indices, comma separated"}, {"--profile", "profile", Kind::text, "stereographic|cone"}}},
      {"sweep-homotopy",
       "Minimizers along the bubble amplitude homotopy of a plan",
       {{"--plan", "plan", Kind::path, "plan descriptor (construct output)"},
        {"--t", "t", Kind::number_list, "amplitudes in [0, 1]"},
        {"--restarts", "restarts", Kind::integer, "starts per amplitude"},
        {"--max-sweeps", "max_sweeps", Kind::integer, "sweep limit per start"}}},
  };
  return specs;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double to_number(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool is_short_map_name(const std::string& s) {
  return s == "constant" || s == "identity" || s == "antipodal" || s == "wobble" || s == "fold";
}

ordered_json convert(const FlagSpec& f, const std::string& text) {
  try {
    switch (f.kind) {
      case Kind::text:
        return text;
      case Kind::path:
        return fs::absolute(text).string();
      case Kind::map:
        return is_short_map_name(text) ? text : fs::absolute(text).string();
      case Kind::integer:
        return to_integer(text);
      case Kind::number:
        return to_number(text);
      case Kind::int_or_auto:
        return text == "auto" ? ordered_json("auto") : ordered_json(to_integer(text));
      case Kind::number_or_auto:
        return text == "auto" ? ordered_json("auto") : ordered_json(to_number(text));
      case Kind::int_list: {
        ordered_json a = ordered_json::array();
        for (const auto& s : split(text)) a.push_back(to_integer(s));
        return a;
      }
      case Kind::number_list: {
        ordered_json a = ordered_json::array();
        for (const auto& s : split(text)) a.push_back(to_number(s));
        return a;
      }
      case Kind::flag:
        return true;
    }
  } catch (const std::logic_error&) {
    throw ConfigError(f.flag + ": cannot parse '" + text + "'");
  }
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubblelab: bubble insertion, W1p estimates and minimizing harmonic maps from the ball to the sphere"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(build_id()));

  std::string config_path, output_dir, resolution, kernel;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> h;
  std::string name;
  app.add_option("--config", config_path, "experiment config (JSON: command, params, seed, ...)");
  app.add_option("--output", output_dir, "output directory (default: config 'output' or '.')");
  app.add_option("--seed", seed, "64-bit seed recorded in every output");
  app.add_option("--threads", threads, "worker threads (default: $BUBBLELAB_THREADS or 1)");
  app.add_option("--resolution", resolution, "sphere quadrature resolution <n_phi>x<n_theta>");
  app.add_option("--h", h, "lattice spacing");
  app.add_option("--name", name, "output file stem (default: the command name)");
  app.add_option("--kernels", kernel, "force the kernel variant: scalar|avx2");
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  for (const auto& sc : subcommands()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    for (const auto& f : sc.flags) {
      if (f.kind == Kind::flag) sub->add_flag(f.flag, flags[sc.name][f.key], f.help);
      else sub->add_option(f.flag, values[sc.name][f.key], f.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (!kernel.empty() && !kernels::select_kernels(kernel)) throw ConfigError("kernel variant '" + kernel + "' is not available");
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    std::string command = cfg.command;
    for (const auto& sc : subcommands()) {
      CLI::App* sub = app.get_subcommand(sc.name);
      if (!sub->parsed()) continue;
      if (!command.empty() && command != sc.name)
        throw ConfigError("config command '" + command + "' conflicts with subcommand '" + sc.name + "'");
      command = sc.name;
      for (const auto& f : sc.flags) {
        if (f.kind == Kind::flag) {
          if (flags[sc.name][f.key]) cfg.params[f.key] = true;
        } else if (sub->count(f.flag) > 0) {
          cfg.params[f.key] = convert(f, values[sc.name][f.key]);
        }
      }
    }
    if (command.empty()) throw ConfigError("no command: give a subcommand or a config with 'command'");
    cfg.command = command;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed) cfg.seed = *seed;
    if (threads) {
      if (*threads < 1) throw ConfigError("--threads must be positive");
      cfg.threads = *threads;
    }
    if (!resolution.empty()) cfg.resolution = GridResolution::parse(resolution);
    if (h) cfg.h = *h;
    if (!name.empty()) cfg.params["name"] = name;

    const ExperimentResult r = run(cfg);
    if (r.exit_code == kExitConfig) {
      std::cerr << "config error: " << r.message << "\n";
      return r.exit_code;
    }
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
    for (const auto& c : r.summary["checks"])
      std::cout << (c["passed"].get<bool>() ? "  ok    " : "  FAIL  ") << c["name"].get<std::string>() << "\n";
    if (r.exit_code != kExitOk) std::cerr << cfg.command << ": " << r.message << "\n";
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}
