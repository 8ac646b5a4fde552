#include "bubblelab/map_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "bubblelab/construction.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/output.hpp"

namespace bubblelab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

UnitVec3 unit_from(const ordered_json& v) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("expected a 3-vector");
  return UnitVec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

const ordered_json& params_of(const ordered_json& j) {
  static const ordered_json empty = ordered_json::object();
  return j.contains("params") ? j.at("params") : empty;
}

MapPtr leaf_from_json(const std::string& kind, const ordered_json& j, const fs::path& dir) {
  const ordered_json& p = params_of(j);
  if (kind == "constant") return std::make_shared<ConstantMap>(unit_from(p.at("value")));
  if (kind == "identity") return std::make_shared<IdentityMap>();
  if (kind == "antipodal") return std::make_shared<AntipodalMap>();
  if (kind == "wobble") {
    WobbleMap::Params w;
    w.amplitude = p.value("amplitude", w.amplitude);
    w.shear = p.value("shear", w.shear);
    w.tilt = p.value("tilt", w.tilt);
    w.bend = p.value("bend", w.bend);
    return std::make_shared<WobbleMap>(w);
  }
  if (kind == "fold") return std::make_shared<FoldMap>(p.value("kappa", 0.25));
  if (kind == "grid") {
    if (!p.contains("path")) throw ConfigError("grid map descriptor needs params.path");
    const fs::path bin = dir / p.at("path").get<std::string>();
    auto g = std::make_shared<GridMap>(read_grid_map_binary(bin, p.at("n_phi").get<int>(), p.at("n_theta").get<int>()));
    g->set_source(p.at("path").get<std::string>());
    return g;
  }
  if (kind == "bubble") {
    BubbleSpec b;
    b.center = unit_from(p.at("center"));
    b.j = p.at("j").get<int>();
    b.target = unit_from(p.at("target"));
    b.orientation = p.value("orientation", 1);
    b.mirror = p.value("mirror", false);
    const std::string prof = p.value("profile", std::string("stereographic"));
    if (prof != "stereographic" && prof != "cone") throw ConfigError("unknown bubble profile '" + prof + "'");
    b.profile = prof == "cone" ? BubbleProfile::cone : BubbleProfile::stereographic;
    b.amplitude = p.value("amplitude", 1.0);
    return std::make_shared<BubbleEvaluator>(b);
  }
  if (kind == "squash_cap")
    return std::make_shared<SquashCapEvaluator>(unit_from(p.at("center")), p.at("delta").get<double>(),
                                                map_from_json(p.at("base"), dir));
  if (kind == "plan") return std::make_shared<SphereMap>(build_phi2(plan_from_json(j)));
  throw ConfigError("unknown map kind '" + kind + "'");
}

}  // namespace

MapPtr map_from_json(const ordered_json& j, const fs::path& dir) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "patched") {
      MapPtr base = map_from_json(params_of(j).at("base"), dir);
      std::vector<Patch> patches;
      for (const auto& pj : j.at("patches"))
        patches.push_back({SphericalCap(unit_from(pj.at("center")), pj.at("radius").get<double>()), map_from_json(pj.at("map"), dir)});
      return std::make_shared<SphereMap>(std::move(base), std::move(patches));
    }
    MapPtr leaf = leaf_from_json(kind, j, dir);
    if (j.contains("patches") && !j.at("patches").empty()) {
      ordered_json wrapped = {{"kind", "patched"}, {"params", {{"base", {{"kind", kind}, {"params", params_of(j)}}}}}, {"patches", j.at("patches")}};
      return map_from_json(wrapped, dir);
    }
    return leaf;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("map descriptor: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("map descriptor: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("map descriptor: ") + e.what());
  }
}

MapPtr load_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map descriptor " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("map descriptor " + path.string() + ": " + e.what());
  }
  return map_from_json(j, path.parent_path());
}

MapPtr map_from_name_or_path(const std::string& spec) {
  if (spec == "constant") return std::make_shared<ConstantMap>(UnitVec3(kNorthPole));
  if (spec == "identity") return std::make_shared<IdentityMap>();
  if (spec == "antipodal") return std::make_shared<AntipodalMap>();
  if (spec == "wobble") return std::make_shared<WobbleMap>();
  if (spec == "fold") return std::make_shared<FoldMap>();
  return load_map(spec);
}

fs::path write_grid_map(const GridMap& g, const fs::path& stem) {
  fs::path bin = stem;
  bin += ".bin";
  fs::path side = stem;
  side += ".json";
  std::string bytes(g.samples().size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < g.samples().size(); ++i) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(g.samples()[i]);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    std::memcpy(bytes.data() + i * sizeof(double), &u, sizeof(u));
  }
  write_file_atomic(bin, bytes);
  ordered_json sc = {{"kind", "grid"},
                     {"params",
                      {{"n_phi", g.n_phi()},
                       {"n_theta", g.n_theta()},
                       {"path", bin.filename().string()},
                       {"dtype", "float64"},
                       {"byte_order", "little"},
                       {"layout", "row-major [n_phi][n_theta][3], nodes at midpoint (phi, theta)"}}}};
  write_file_atomic(side, sc.dump(2) + "\n");
  return side;
}

GridMap read_grid_map_binary(const fs::path& bin, int n_phi, int n_theta) {
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ConfigError("cannot open grid samples " + bin.string());
  const std::size_t count = static_cast<std::size_t>(n_phi) * n_theta * 3;
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != count * sizeof(double)) throw ConfigError("grid samples " + bin.string() + ": size does not match n_phi x n_theta x 3");
  std::vector<double> s(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u;
    std::memcpy(&u, bytes.data() + i * sizeof(double), sizeof(u));
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    s[i] = std::bit_cast<double>(u);
  }
  return GridMap(n_phi, n_theta, std::move(s));
}

GridMap read_grid_map(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw ConfigError("cannot open grid sidecar " + sidecar.string());
  try {
    const ordered_json j = ordered_json::parse(in);
    const auto& p = j.at("params");
    GridMap g = read_grid_map_binary(sidecar.parent_path() / p.at("path").get<std::string>(), p.at("n_phi").get<int>(),
                                     p.at("n_theta").get<int>());
    g.set_source(p.at("path").get<std::string>());
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grid sidecar " + sidecar.string() + ": " + e.what());
  }
}

}  // namespace bubblelab
