#include "bubblelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "bubblelab/construction.hpp"
#include "bubblelab/degree.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/estimates.hpp"
#include "bubblelab/field_io.hpp"
#include "bubblelab/map_functionals.hpp"
#include "bubblelab/map_io.hpp"
#include "bubblelab/minimizer.hpp"
#include "bubblelab/output.hpp"
#include "bubblelab/parallel.hpp"
#include "bubblelab/singularity.hpp"

namespace bubblelab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kEightPi = 8.0 * kPi;

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

UnitVec3 unit_from(const ordered_json& v) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("expected a 3-vector, got " + v.dump());
  return UnitVec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

std::vector<double> number_list(const ordered_json& v) {
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError("expected a number or a list of numbers, got " + v.dump());
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

std::vector<int> int_list(const ordered_json& v) {
  std::vector<int> out;
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array()) throw ConfigError("expected an integer or a list of integers, got " + v.dump());
  for (const auto& x : v) out.push_back(x.get<int>());
  return out;
}

/// Collects named pass/fail records for the summary.
class Checks {
 public:
  void add(const std::string& name, bool passed, ordered_json detail = ordered_json::object()) {
    ordered_json c = {{"name", name}, {"passed", passed}};
    for (auto it = detail.begin(); it != detail.end(); ++it) c[it.key()] = it.value();
    list_.push_back(std::move(c));
    ok_ = ok_ && passed;
  }
  bool ok() const { return ok_; }
  const ordered_json& json() const { return list_; }

 private:
  ordered_json list_ = ordered_json::array();
  bool ok_ = true;
};

/// Shared state of one command: config access, outputs, checks.
class Context {
 public:
  explicit Context(const ExperimentConfig& c) : cfg(c) {}

  const ExperimentConfig& cfg;
  ordered_json results = ordered_json::object();
  ordered_json tolerances = ordered_json::object();
  Checks checks;
  std::vector<fs::path> files;

  const ordered_json& params() const { return cfg.params; }
  bool has(const char* key) const { return cfg.params.contains(key) && !cfg.params.at(key).is_null(); }
  const ordered_json& at(const char* key) const {
    if (!has(key)) throw ConfigError(cfg.command + ": missing parameter '" + key + "'");
    return cfg.params.at(key);
  }
  template <typename T>
  T get(const char* key, T fallback) const {
    return has(key) ? cfg.params.at(key).get<T>() : fallback;
  }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    if (path.is_absolute() || cfg.base_dir.empty()) return path;
    return cfg.base_dir / path;
  }

  fs::path existing(const std::string& p) const {
    const fs::path path = resolve(p);
    if (!fs::exists(path)) throw ConfigError(cfg.command + ": path does not exist: " + path.string());
    return path;
  }

  /// Short name, descriptor path or inline descriptor.
  MapPtr map(const ordered_json& v) const {
    if (v.is_object()) return map_from_json(v, cfg.base_dir);
    if (!v.is_string()) throw ConfigError(cfg.command + ": map must be a name, a path or a descriptor object");
    const std::string s = v.get<std::string>();
    static const char* names[] = {"constant", "identity", "antipodal", "wobble", "fold"};
    for (const char* n : names)
      if (s == n) return map_from_name_or_path(s);
    return load_map(existing(s));
  }

  /// A JSON object given inline or as a path to a JSON file.
  ordered_json object(const ordered_json& v) const {
    if (v.is_object()) return v;
    if (!v.is_string()) throw ConfigError(cfg.command + ": expected an object or a path");
    std::ifstream in(existing(v.get<std::string>()));
    try {
      return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(cfg.command + ": " + v.get<std::string>() + ": " + e.what());
    }
  }

  GridResolution resolution() const {
    if (cfg.resolution) return *cfg.resolution;
    if (has("resolution")) return GridResolution::parse(at("resolution").get<std::string>());
    return {180, 360};
  }

  double h(double fallback) const {
    if (cfg.h) return *cfg.h;
    return get("h", fallback);
  }

  fs::path out(const std::string& suffix) const { return cfg.output_dir / (cfg.stem() + suffix); }

  void write_csv(const std::string& suffix, const CsvTable& t) {
    const fs::path p = out(suffix);
    write_file_atomic(p, t.str());
    files.push_back(p);
  }

  void quadrature_tolerances() {
    const GridResolution r = resolution();
    tolerances["quadrature"] = {{"resolution", std::to_string(r.n_phi) + "x" + std::to_string(r.n_theta)},
                                {"weights", "exact cell areas, patch-adapted rings"},
                                {"fd_step", kDefaultFdStep}};
  }
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

std::vector<UnitVec3> regular_values(const Context& cx) {
  std::vector<UnitVec3> ys;
  if (cx.has("regular_values")) {
    for (const auto& y : cx.at("regular_values")) ys.push_back(unit_from(y));
  } else {
    ys = {UnitVec3(0.31, -0.52, 0.79), UnitVec3(-0.6, 0.2, -0.77)};
  }
  return ys;
}

/// Signed preimage count of y, optionally restricted to a cap.
struct RegularValue {
  bool certified = false;
  int degree = 0;
  std::size_t preimages = 0;
  std::string error;
};

RegularValue regular_value(const MapEvaluator& m, const UnitVec3& y, const SphereQuadGrid& grid,
                           const std::optional<SphericalCap>& cap = std::nullopt) {
  RegularValue r;
  try {
    const PreimageCount pc = count_preimages(m, y, grid);
    r.certified = true;
    for (const auto& p : pc.preimages) {
      if (cap && !cap->contains(p.x.vec())) continue;
      r.degree += p.sign;
      ++r.preimages;
    }
  } catch (const NumericalError& e) {
    r.error = e.what();
  }
  return r;
}

ordered_json regular_value_json(const UnitVec3& y, const RegularValue& r) {
  ordered_json j = {{"y", vec_json(y.vec())}, {"certified", r.certified}};
  if (r.certified) {
    j["degree"] = r.degree;
    j["preimages"] = r.preimages;
  } else {
    j["error"] = r.error;
  }
  return j;
}

// ---------------------------------------------------------------- degree

void cmd_degree(Context& cx) {
  cx.quadrature_tolerances();
  cx.tolerances["newton"] = {{"residual", 1e-11}, {"min_abs_det", 1e-6}};
  const MapPtr m = cx.map(cx.at("map"));
  const SphereQuadGrid grid = adapted_grid(*m, cx.resolution());
  const double raw = degree_integral(*m, grid);
  const int deg = static_cast<int>(std::lround(raw));
  cx.results["map"] = m->describe();
  cx.results["degree"] = deg;
  cx.results["raw"] = raw;
  cx.results["quadrature_nodes"] = grid.size();
  ordered_json rv = ordered_json::array();
  CsvTable t({"y_x", "y_y", "y_z", "certified", "degree", "preimages"});
  bool agree = true;
  for (const UnitVec3& y : regular_values(cx)) {
    const RegularValue r = regular_value(*m, y, grid);
    rv.push_back(regular_value_json(y, r));
    t.row({CsvTable::field(y.x()), CsvTable::field(y.y()), CsvTable::field(y.z()), r.certified ? "1" : "0",
           CsvTable::field(static_cast<long long>(r.degree)), CsvTable::field(static_cast<long long>(r.preimages))});
    agree = agree && r.certified && r.degree == deg;
  }
  cx.results["regular_values"] = rv;
  cx.checks.add("integral_near_integer", std::abs(raw - deg) < 0.05, {{"gap", std::abs(raw - deg)}, {"bound", 0.05}});
  cx.checks.add("regular_values_agree", agree);
  cx.write_csv(".csv", t);
}

// ---------------------------------------------------------------- energy

void cmd_energy(Context& cx) {
  cx.quadrature_tolerances();
  const MapPtr m = cx.map(cx.at("map"));
  const SphereQuadGrid grid = adapted_grid(*m, cx.resolution());
  std::optional<Region> region;
  if (cx.has("region")) {
    const auto& r = cx.at("region");
    region = Region{{SphericalCap(unit_from(r.at("center")), r.at("radius").get<double>())}, r.value("complement", false)};
    cx.results["region"] = r;
  }
  cx.results["map"] = m->describe();
  cx.results["quadrature_nodes"] = grid.size();
  cx.results["boundary_energy"] = boundary_energy(*m, grid, region);
  cx.results["jacobian_area"] = jacobian_area(*m, grid, region);
  cx.results["degree_integral"] = degree_integral(*m, grid, region);
  cx.results["max_grad_sq"] = max_grad_sq(*m, grid);
  CsvTable t({"quantity", "value"});
  for (const char* k : {"boundary_energy", "jacobian_area", "degree_integral", "max_grad_sq"})
    t.row({k, CsvTable::field(cx.results[k].get<double>())});
  if (cx.has("compare")) {
    const MapPtr other = cx.map(cx.at("compare"));
    ordered_json rows = ordered_json::array();
    for (double p : number_list(cx.has("p") ? cx.at("p") : ordered_json(2.0))) {
      const W1pDistance d = w1p_dist(*m, *other, p, grid, region);
      rows.push_back({{"p", p}, {"norm", d.norm}, {"seminorm", d.seminorm}, {"lp", d.lp}});
      t.row({"w1p_norm_p" + format_double(p), CsvTable::field(d.norm)});
    }
    cx.results["distance_to"] = other->describe();
    cx.results["w1p"] = rows;
  }
  cx.write_csv(".csv", t);
}

// ---------------------------------------------------------------- construct

void cmd_construct(Context& cx) {
  cx.quadrature_tolerances();
  cx.tolerances["antipodal_mismatch"] = kAntipodalTol;
  cx.tolerances["newton"] = {{"residual", 1e-11}, {"min_abs_det", 1e-6}};
  cx.tolerances["budget_slack"] = 1e-3;
  cx.tolerances["support_slack"] = 0.02;
  const GridResolution res = cx.resolution();
  const MapPtr base = cx.map(cx.at("base_map"));
  const SphereQuadGrid g0 = adapted_grid(*base, res);
  const double deg0 = degree_integral(*base, g0);
  const int d0 = static_cast<int>(std::lround(deg0));
  cx.results["base_map"] = base->describe();
  cx.results["degree_phi"] = deg0;

  AntipodalPair pair;
  if (cx.has("q") && cx.at("q").is_array()) {
    pair.q = unit_from(cx.at("q"));
    pair.mismatch = distance(base->value(pair.q.vec()), base->value(-pair.q.vec()));
    cx.results["q_source"] = "given";
  } else {
    pair = find_antipodal_pair(*base, build_quad_grid(res.n_phi, res.n_theta));
    cx.results["q_source"] = "antipodal search";
  }
  cx.results["q"] = vec_json(pair.q.vec());
  cx.results["pair_mismatch"] = pair.mismatch;

  double delta = 0.0;
  if (cx.has("delta") && cx.at("delta").is_number()) {
    delta = cx.at("delta").get<double>();
    cx.results["delta_source"] = "given";
  } else {
    const DeltaChoice dc = select_delta(*base, pair.q, cx.get("eps", 1.0), res);
    delta = dc.delta;
    cx.results["delta_source"] = "select_delta";
    cx.results["delta_choice"] = {{"max_grad_sq", dc.max_grad_sq}, {"halvings", dc.halvings}, {"image_area_bound", dc.image_area_bound}};
  }
  cx.results["delta"] = delta;

  const Phi1Spec p1{pair.q, delta, base};
  const SphereMap phi1 = build_phi1(p1);
  const SphereQuadGrid g1 = adapted_grid(phi1, res);
  const double deg1 = degree_integral(phi1, g1);
  cx.results["degree_phi1"] = deg1;
  cx.checks.add("phi1_degree_matches_base", std::lround(deg1) == d0, {{"raw", deg1}, {"base", d0}});

  const std::vector<UnitVec3> ys = regular_values(cx);
  ordered_json rv = ordered_json::object();
  bool rv_agree = true;
  auto record_rv = [&](const char* name, const MapEvaluator& m, const SphereQuadGrid& g, int expect) {
    ordered_json list = ordered_json::array();
    for (const UnitVec3& y : ys) {
      const RegularValue r = regular_value(m, y, g);
      list.push_back(regular_value_json(y, r));
      rv_agree = rv_agree && r.certified && r.degree == expect;
    }
    rv[name] = list;
  };
  record_rv("phi", *base, g0, d0);
  record_rv("phi1", phi1, g1, d0);

  // ‖φ − φ₁‖_{H¹} against the closed-form bound.
  const double G = max_grad_sq(*base, g0);
  cx.results["max_grad_sq"] = G;
  std::vector<double> h1_deltas = cx.has("h1_deltas") ? number_list(cx.at("h1_deltas")) : std::vector<double>{delta};
  ordered_json l33 = ordered_json::array();
  CsvTable t33({"delta", "h1_distance", "bound"});
  bool l33_ok = true;
  for (double d : h1_deltas) {
    const SphereMap m1 = d == delta ? phi1 : build_phi1({pair.q, d, base});
    const SphereQuadGrid g = adapted_grid(m1, res);
    const double dist = w1p_dist(*base, m1, 2.0, g).norm;
    const double bound = phi1_h1_bound(G, d);
    l33.push_back({{"delta", d}, {"h1_distance", dist}, {"bound", bound}});
    t33.row({CsvTable::field(d), CsvTable::field(dist), CsvTable::field(bound)});
    l33_ok = l33_ok && dist <= bound;
  }
  cx.results["lemma33"] = l33;
  cx.checks.add("phi1_h1_within_bound", l33_ok);
  cx.write_csv("_lemma33.csv", t33);

  const int N = cx.get("N", 1);
  if (N >= 1) {
    int j = 0;
    if (cx.has("j") && cx.at("j").is_number_integer()) j = cx.at("j").get<int>();
    else j = smallest_admissible_j(delta, N);
    const std::string prof = cx.get<std::string>("profile", "stereographic");
    if (prof != "stereographic" && prof != "cone") throw ConfigError("construct: unknown profile '" + prof + "'");
    Phi2Spec spec = Phi2Spec::make(p1, N, j, prof == "cone" ? BubbleProfile::cone : BubbleProfile::stereographic);
    spec.validate();
    const SphereMap phi2 = build_phi2(spec);
    const SphereQuadGrid g2 = adapted_grid(phi2, res);
    const double deg2 = degree_integral(phi2, g2);
    cx.results["N"] = N;
    cx.results["j"] = j;
    cx.results["alpha"] = spec.alpha;
    cx.results["degree_phi2"] = deg2;
    cx.checks.add("phi2_degree_matches_base", std::lround(deg2) == d0, {{"raw", deg2}, {"base", d0}});
    record_rv("phi2", phi2, g2, d0);

    // Bubble caps: +1 at ξ_i, −1 at the mirrored −ξ_i.
    ordered_json caps = ordered_json::array();
    CsvTable tc({"center_x", "center_y", "center_z", "chordal_radius", "expected", "degree_integral", "regular_value_degrees"});
    bool caps_ok = true;
    for (int mirror = 0; mirror < 2; ++mirror)
      for (const auto& xi : spec.xis) {
        const SphericalCap cap(mirror ? -xi : xi, 2.0 / j);
        const int expect = mirror ? -1 : 1;
        const double raw = degree_integral(phi2, g2, Region::cap(cap));
        ordered_json rvs = ordered_json::array();
        std::string rv_text;
        bool cap_ok = std::lround(raw) == expect;
        for (const UnitVec3& y : ys) {
          const RegularValue r = regular_value(phi2, y, g2, cap);
          rvs.push_back(regular_value_json(y, r));
          rv_text += (rv_text.empty() ? "" : ";") + (r.certified ? std::to_string(r.degree) : std::string("uncertified"));
          cap_ok = cap_ok && r.certified && r.degree == expect;
        }
        caps_ok = caps_ok && cap_ok;
        caps.push_back({{"center", vec_json(cap.center().vec())}, {"chordal_radius", cap.chordal_radius()}, {"expected", expect},
                        {"degree_integral", raw}, {"regular_values", rvs}});
        tc.row({CsvTable::field(cap.center().x()), CsvTable::field(cap.center().y()), CsvTable::field(cap.center().z()),
                CsvTable::field(cap.chordal_radius()), CsvTable::field(static_cast<long long>(expect)), CsvTable::field(raw), rv_text});
      }
    cx.results["caps"] = caps;
    cx.checks.add("cap_degrees_unit_and_mirrored", caps_ok);
    cx.write_csv("_caps.csv", tc);

    const double support = diff_support_area(*base, phi2, g2);
    const double support_bound = 8.0 * kPi * delta * delta;
    cx.results["diff_support_area"] = support;
    cx.results["diff_support_bound"] = support_bound;
    cx.checks.add("diff_support_within_8pi_delta2", support <= support_bound * 1.02, {{"value", support}, {"bound", support_bound * 1.02}});

    if (cx.has("chain_p")) {
      // ‖φ−φ₂‖_{W1p} ≤ ‖φ−φ₂‖_{Lp} + ‖∇(φ−φ₁)‖_{L²} |{φ≠φ₁}|^{(2−p)/(2p)} + Σ_caps ‖∇(φ₁−φ₂)‖_{Lp(cap)}
      const double grad_l2 = w1p_dist(*base, phi1, 2.0, g1).seminorm;
      const double support1 = diff_support_area(*base, phi1, g1);
      ordered_json chain = ordered_json::array();
      CsvTable tb({"p", "w1p_distance", "lp_term", "holder_term", "cap_terms", "chain_total"});
      bool chain_ok = true;
      for (double p : number_list(cx.at("chain_p"))) {
        if (!(p >= 1.0 && p < 2.0)) throw ConfigError("construct: chain_p values must lie in [1, 2)");
        const W1pDistance d = w1p_dist(*base, phi2, p, g2);
        const double holder = grad_l2 * std::pow(support1, (2.0 - p) / (2.0 * p));
        double cap_sum = 0.0;
        ordered_json per_cap = ordered_json::array();
        for (const Patch& patch : phi2.patches()) {
          const double c = w1p_dist(phi1, phi2, p, g2, Region::cap(patch.cap)).seminorm;
          per_cap.push_back(c);
          cap_sum += c;
        }
        const double total = d.lp + holder + cap_sum;
        chain_ok = chain_ok && d.norm <= total + 1e-3;
        chain.push_back({{"p", p}, {"w1p_distance", d.norm}, {"lp_term", d.lp}, {"holder_term", holder}, {"grad_l2_phi_phi1", grad_l2},
                         {"support_phi_phi1", support1}, {"cap_terms", per_cap}, {"chain_total", total}});
        tb.row({CsvTable::field(p), CsvTable::field(d.norm), CsvTable::field(d.lp), CsvTable::field(holder), CsvTable::field(cap_sum),
                CsvTable::field(total)});
      }
      cx.results["budget_chain"] = chain;
      cx.checks.add("budget_chain_holds", chain_ok, {{"slack", 1e-3}});
      cx.write_csv("_chain.csv", tb);
    }

    const fs::path plan = cx.out("_plan.json");
    write_file_atomic(plan, dump_json(plan_to_json(spec)) + "\n");
    cx.files.push_back(plan);
  }
  cx.results["regular_values"] = rv;
  cx.checks.add("regular_values_agree", rv_agree);
}

// ---------------------------------------------------------------- minimize

double max_unit_defect(const BallField& u) {
  double worst = 0.0;
  const BallLattice& L = u.lattice();
  for (const auto* list : {&L.interior_nodes(), &L.boundary_nodes()})
    for (std::size_t idx : *list) worst = std::max(worst, std::abs(norm(u.at(idx)) - 1.0));
  return worst;
}

bool boundary_matches(const BallField& u, const MapEvaluator& m) {
  BallField ref(u.lattice_ptr());
  sample_boundary(m, ref);
  for (std::size_t idx : u.lattice().boundary_nodes())
    if (!(u.ux[idx] == ref.ux[idx] && u.uy[idx] == ref.uy[idx] && u.uz[idx] == ref.uz[idx])) return false;
  return true;
}

bool trace_nonincreasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1]) return false;
  return true;
}

SolverConfig solver_config(const Context& cx) {
  SolverConfig s;
  s.max_sweeps = cx.get("max_sweeps", s.max_sweeps);
  s.rel_tol = cx.get("rel_tol", s.rel_tol);
  s.restarts = cx.get("restarts", s.restarts);
  s.seed = cx.cfg.seed;
  s.threads = cx.cfg.threads;
  s.validate();
  return s;
}

ordered_json report_json(const EnergyReport& r, std::size_t start) {
  return {{"start", start},         {"radial_start", r.radial_start}, {"start_seed", r.start_seed}, {"energy", r.energy},
          {"sweeps", r.sweeps},     {"converged", r.converged},       {"degenerate_updates", r.degenerate_updates}};
}

void add_singularity_checks(Context& cx, const SingularityReport& rep, bool converged) {
  bool unit = true;
  for (const auto& c : rep.cells) unit = unit && std::abs(c.degree) == 1;
  cx.checks.add("degree_conserved", rep.conserved(),
                {{"interior_sum", rep.interior_degree_sum + rep.trace_degree_sum}, {"boundary", rep.total_boundary_degree},
                 {"unresolved", rep.unresolved.size()}});
  if (rep.map_degree)
    cx.checks.add("boundary_degree_matches_map", rep.total_boundary_degree == *rep.map_degree,
                  {{"lattice", rep.total_boundary_degree}, {"map", *rep.map_degree}});
  // Unit defect degrees are asserted only for converged minimizers.
  cx.checks.add("defect_degrees_unit", unit || !converged, {{"applies", converged}});
}

void coarea_into(Context& cx, const BallField& u, const std::string& grid_text, const char* mode) {
  const GridResolution fg = GridResolution::parse(grid_text);
  const CoareaResult cr = coarea_check(u, build_quad_grid(fg.n_phi, fg.n_theta));
  const double ratio = cr.rhs > 0.0 ? cr.lhs / cr.rhs : std::nan("");
  cx.results["coarea"] = {{"fiber_grid", grid_text}, {"lhs", cr.lhs}, {"rhs", cr.rhs}, {"ratio", ratio}, {"skipped_tets", cr.skipped_tets}, {"mode", mode}};
  cx.tolerances["coarea"] = {{"fiber_grid", grid_text}, {"degenerate_tet_limit", 1e-3}, {"slack", 0.05}};
  if (std::string(mode) == "equality") {
    const double rel = std::abs(cr.lhs - cr.rhs) / cr.rhs;
    cx.checks.add("coarea_equality", rel <= 0.05, {{"relative_gap", rel}, {"bound", 0.05}});
  } else {
    cx.checks.add("coarea_inequality", cr.lhs >= 0.95 * cr.rhs, {{"lhs", cr.lhs}, {"rhs_times_0_95", 0.95 * cr.rhs}});
  }
}

void cmd_minimize(Context& cx) {
  const MapPtr m = cx.map(cx.at("boundary"));
  const SolverConfig sc = solver_config(cx);
  const double h = cx.h(1.0 / 16.0);
  cx.tolerances["solver"] = {{"rel_tol", sc.rel_tol}, {"max_sweeps", sc.max_sweeps}, {"unit_length", 1e-12}};
  std::optional<BallField> warm;
  if (cx.has("warm_start")) warm = read_field(cx.existing(cx.at("warm_start").get<std::string>()));
  const MinimizeResult res = minimize(*m, h, sc, warm ? &*warm : nullptr);
  const BallField& best = res.best_field();
  const EnergyReport& br = res.best_report();

  cx.results["boundary"] = m->describe();
  cx.results["h"] = best.lattice().h();
  cx.results["lattice_n"] = best.lattice().n();
  cx.results["interior_nodes"] = best.lattice().interior_nodes().size();
  cx.results["boundary_nodes"] = best.lattice().boundary_nodes().size();
  cx.results["best_start"] = res.best;
  cx.results["best"] = report_json(br, res.best);

  CsvTable trace({"start", "sweep", "energy"});
  bool monotone = true, boundary_ok = true;
  double unit = 0.0;
  ordered_json starts = ordered_json::array();
  const bool detect = cx.get("detect", false);
  std::optional<int> map_degree;
  if (detect) map_degree = static_cast<int>(std::lround(degree_integral(*m, adapted_grid(*m, cx.resolution()))));
  for (std::size_t r = 0; r < res.reports.size(); ++r) {
    const EnergyReport& rep = res.reports[r];
    for (std::size_t s = 0; s < rep.energy_trace.size(); ++s)
      trace.row({CsvTable::field(static_cast<long long>(r)), CsvTable::field(static_cast<long long>(s)), CsvTable::field(rep.energy_trace[s])});
    monotone = monotone && trace_nonincreasing(rep.energy_trace);
    boundary_ok = boundary_ok && boundary_matches(res.fields[r], *m);
    unit = std::max(unit, max_unit_defect(res.fields[r]));
    ordered_json sj = report_json(rep, r);
    if (detect) {
      const SingularityReport sr = detect_singularities(res.fields[r], map_degree);
      sj["singular_cells"] = sr.cells.size();
      sj["trace_cells"] = sr.trace_cells.size();
      sj["unresolved_cells"] = sr.unresolved.size();
    }
    starts.push_back(sj);
  }
  cx.results["starts"] = starts;
  cx.checks.add("energy_nonincreasing", monotone);
  cx.checks.add("unit_length", unit <= 1e-12, {{"max_defect", unit}, {"bound", 1e-12}});
  cx.checks.add("boundary_unchanged", boundary_ok);
  cx.write_csv("_trace.csv", trace);

  if (detect) {
    cx.tolerances["cell_degree_rounding_gap"] = 0.2;
    const SingularityReport sr = detect_singularities(best, map_degree);
    cx.results["singularities"] = sr.to_json();
    add_singularity_checks(cx, sr, br.converged);
  }
  if (cx.has("coarea_grid")) coarea_into(cx, best, cx.at("coarea_grid").get<std::string>(), "inequality");

  if (cx.get("export_field", true)) {
    const fs::path stem = cx.out("_field");
    write_field(best, stem, {{"command", "minimize"}, {"seed", cx.cfg.seed}, {"start", res.best}, {"sweeps", br.sweeps}, {"energy", br.energy}});
    fs::path vtk = stem, side = stem;
    vtk += ".vtk";
    side += ".json";
    cx.files.push_back(vtk);
    cx.files.push_back(side);
    cx.results["field"] = vtk.filename().string();
  }
}

// ---------------------------------------------------------------- detect

fs::path default_field(const Context& cx) {
  if (cx.has("field")) return cx.existing(cx.at("field").get<std::string>());
  const fs::path p = cx.cfg.output_dir / "minimize_field.vtk";
  if (!fs::exists(p)) throw ConfigError("detect: no field given and " + p.string() + " does not exist");
  return p;
}

void cmd_detect(Context& cx) {
  cx.tolerances["cell_degree_rounding_gap"] = 0.2;
  const fs::path path = default_field(cx);
  const BallField u = read_field(path);
  std::optional<int> map_degree;
  if (cx.has("map")) {
    cx.quadrature_tolerances();
    const MapPtr m = cx.map(cx.at("map"));
    map_degree = static_cast<int>(std::lround(degree_integral(*m, adapted_grid(*m, cx.resolution()))));
  }
  const SingularityReport sr = detect_singularities(u, map_degree);
  cx.results["field"] = path.filename().string();
  cx.results["energy"] = dirichlet_energy(u);
  cx.results["singularities"] = sr.to_json();
  add_singularity_checks(cx, sr, cx.get("converged", true));
  CsvTable t({"kind", "i", "j", "k", "center_x", "center_y", "center_z", "degree", "raw", "local_energy"});
  auto rows = [&](const char* kind, const std::vector<SingularCell>& cells) {
    for (const auto& c : cells)
      t.row({kind, CsvTable::field(static_cast<long long>(c.cell.i)), CsvTable::field(static_cast<long long>(c.cell.j)),
             CsvTable::field(static_cast<long long>(c.cell.k)), CsvTable::field(c.center.x), CsvTable::field(c.center.y),
             CsvTable::field(c.center.z), CsvTable::field(static_cast<long long>(c.degree)), CsvTable::field(c.raw),
             CsvTable::field(c.local_energy)});
  };
  rows("interior", sr.cells);
  rows("trace", sr.trace_cells);
  cx.write_csv(".csv", t);
}

// ---------------------------------------------------------------- verify-coarea

void cmd_verify_coarea(Context& cx) {
  const std::string grid = cx.get<std::string>("fiber_grid", "16x32");
  if (cx.has("field")) {
    const BallField u = read_field(cx.existing(cx.at("field").get<std::string>()));
    cx.results["field"] = cx.at("field");
    coarea_into(cx, u, grid, cx.get<std::string>("mode", "inequality").c_str());
    return;
  }
  const std::string kind = cx.get<std::string>("synthetic", "radial");
  const double h = cx.h(1.0 / 32.0);
  BallField u(BallLattice::build(h));
  MapPtr m;
  if (kind == "radial") m = std::make_shared<IdentityMap>();
  else if (kind == "antiradial") m = std::make_shared<AntipodalMap>();
  else if (kind == "constant") m = std::make_shared<ConstantMap>(UnitVec3(kNorthPole));
  else throw ConfigError("verify-coarea: unknown synthetic field '" + kind + "'");
  sample_boundary(*m, u);
  radial_fill(*m, u);
  cx.results["synthetic"] = kind;
  cx.results["h"] = h;
  const std::string mode = cx.get<std::string>("mode", kind == "constant" ? "inequality" : "equality");
  if (mode != "equality" && mode != "inequality") throw ConfigError("verify-coarea: mode must be equality or inequality");
  coarea_into(cx, u, grid, mode.c_str());
  CsvTable t({"lhs", "rhs", "ratio"});
  const auto& c = cx.results["coarea"];
  t.row({CsvTable::field(c["lhs"].get<double>()), CsvTable::field(c["rhs"].get<double>()), CsvTable::field(c["ratio"].get<double>())});
  cx.write_csv(".csv", t);
}

// ---------------------------------------------------------------- single bubbles

struct SingleBubble {
  std::shared_ptr<SphereMap> map;
  std::shared_ptr<ConstantMap> constant;
  BubbleSpec spec;
};

SingleBubble single_bubble(const Context& cx, int j, BubbleProfile profile) {
  SingleBubble b;
  b.spec.center = cx.has("center") ? unit_from(cx.at("center")) : UnitVec3(0.36, 0.48, 0.8);
  b.spec.target = cx.has("target") ? unit_from(cx.at("target")) : UnitVec3(kNorthPole);
  b.spec.j = j;
  b.spec.profile = profile;
  b.constant = std::make_shared<ConstantMap>(b.spec.target);
  b.map = std::make_shared<SphereMap>(b.constant, std::vector<Patch>{build_bubble(b.spec, b.constant.get())});
  return b;
}

BubbleProfile profile_param(const Context& cx) {
  const std::string prof = cx.get<std::string>("profile", "stereographic");
  if (prof == "stereographic") return BubbleProfile::stereographic;
  if (prof == "cone") return BubbleProfile::cone;
  throw ConfigError(cx.cfg.command + ": unknown profile '" + prof + "'");
}

void cmd_verify_caps(Context& cx) {
  cx.quadrature_tolerances();
  cx.tolerances["energy_vs_8pi"] = 0.03;
  cx.tolerances["conformality"] = 0.005;
  const std::vector<int> js = cx.has("j") ? int_list(cx.at("j")) : std::vector<int>{10, 20, 40};
  const BubbleProfile profile = profile_param(cx);
  CsvTable t({"j", "energy", "image_area", "energy_over_2area", "rel_err_8pi"});
  std::vector<double> energies;
  ordered_json rows = ordered_json::array();
  bool conformal = true;
  for (int j : js) {
    const SingleBubble b = single_bubble(cx, j, profile);
    const SphereQuadGrid grid = adapted_grid(*b.map, cx.resolution());
    const Region region = Region::cap(SphericalCap(b.spec.center, 1.0 / j));
    const double e = boundary_energy(*b.map, grid, region);
    const double a = jacobian_area(*b.map, grid, region);
    const double ratio = e / (2.0 * a);
    energies.push_back(e);
    conformal = conformal && std::abs(ratio - 1.0) <= 0.005;
    rows.push_back({{"j", j}, {"energy", e}, {"image_area", a}, {"energy_over_2area", ratio}, {"rel_err_8pi", (e - kEightPi) / kEightPi}});
    t.row({CsvTable::field(static_cast<long long>(j)), CsvTable::field(e), CsvTable::field(a), CsvTable::field(ratio),
           CsvTable::field((e - kEightPi) / kEightPi)});
  }
  cx.results["rows"] = rows;
  cx.results["eight_pi"] = kEightPi;
  cx.checks.add("energy_strictly_increasing_in_j", strictly_increasing(energies));
  const double last = std::abs(energies.back() - kEightPi) / kEightPi;
  cx.checks.add("last_within_3pct_of_8pi", last <= 0.03, {{"relative_error", last}});
  cx.checks.add("energy_equals_twice_area", conformal, {{"bound", 0.005}});
  cx.write_csv(".csv", t);
}

void cmd_verify_lemma34(Context& cx) {
  cx.quadrature_tolerances();
  cx.tolerances["adaptive_simpson"] = 1e-10;
  cx.tolerances["i1_slack"] = 1e-6;
  cx.tolerances["bound_slack"] = 0.01;
  const std::vector<double> ps = cx.has("p") ? number_list(cx.at("p")) : std::vector<double>{1.0, 1.25, 1.5, 1.75};
  const std::vector<int> js = cx.has("j") ? int_list(cx.at("j")) : std::vector<int>{5, 10, 20, 40, 80};
  for (double p : ps)
    if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("verify-lemma34: p must lie in [1, 2]");
  for (int j : js)
    if (j < 2) throw ConfigError("verify-lemma34: j must be >= 2");

  // measured[(p, j)] = ∫ |∇_T(bubble − constant)|^p over the sphere
  std::map<std::pair<double, int>, double> measured;
  for (int j : js) {
    const SingleBubble b = single_bubble(cx, j, BubbleProfile::stereographic);
    const SphereQuadGrid grid = adapted_grid(*b.map, cx.resolution());
    for (double p : ps) measured[{p, j}] = std::pow(w1p_dist(*b.map, *b.constant, p, grid).seminorm, p);
  }

  CsvTable t({"p", "j", "I1_a", "I1_b", "I1_quad", "I2", "measured_seminorm_p", "bound_total"});
  ordered_json rows = ordered_json::array(), discrepancies = ordered_json::array();
  int viol_a = 0, viol_b = 0, lattice_rows = 0;
  bool bound_ok = true, i2_monotone = true, columns_monotone = true;
  for (double p : ps) {
    std::vector<double> ia, ib, iq, i2, ms;
    for (int j : js) {
      const double meas = measured[{p, j}];
      ms.push_back(meas);
      ordered_json row = {{"p", p}, {"j", j}};
      if (p < 2.0) {
        ++lattice_rows;
        const double a = i1_bound(p, j, I1Variant::a), bb = i1_bound(p, j, I1Variant::b);
        const double q = i1_quadrature(p, j), s = i2_quadrature(p, j);
        const double bound = bubble_seminorm_bound(p, j).total();
        ia.push_back(a);
        ib.push_back(bb);
        iq.push_back(q);
        i2.push_back(s);
        const bool va = q > a + 1e-6, vb = q > bb + 1e-6;
        viol_a += va;
        viol_b += vb;
        if (va || vb) discrepancies.push_back({{"p", p}, {"j", j}, {"I1_quad", q}, {"I1_a", a}, {"I1_b", bb}, {"violates_a", va}, {"violates_b", vb}});
        bound_ok = bound_ok && meas <= bound * 1.01;
        row.update(ordered_json{{"I1_a", a}, {"I1_b", bb}, {"I1_quad", q}, {"I2", s}, {"measured_seminorm_p", meas}, {"bound_total", bound}});
        t.row({CsvTable::field(p), CsvTable::field(static_cast<long long>(j)), CsvTable::field(a), CsvTable::field(bb), CsvTable::field(q),
               CsvTable::field(s), CsvTable::field(meas), CsvTable::field(bound)});
      } else {
        // p = 2: the closed forms have a pole; only the measurement is reported.
        row.update(ordered_json{{"I1_a", nullptr}, {"I1_b", nullptr}, {"I1_quad", nullptr}, {"I2", nullptr}, {"measured_seminorm_p", meas}, {"bound_total", nullptr}});
        t.row({CsvTable::field(p), CsvTable::field(static_cast<long long>(j)), "", "", "", "", CsvTable::field(meas), ""});
      }
      rows.push_back(row);
    }
    if (p < 2.0) {
      i2_monotone = i2_monotone && strictly_decreasing(i2);
      columns_monotone = columns_monotone && strictly_decreasing(ia) && strictly_decreasing(ib) && strictly_decreasing(iq) && strictly_decreasing(ms);
    }
  }
  std::string identified = "none";
  if (viol_a == 0 && viol_b == 0) identified = "both";
  else if (viol_a == 0) identified = "a";
  else if (viol_b == 0) identified = "b";
  cx.results["rows"] = rows;
  cx.results["i1_violations"] = {{"variant_a", viol_a}, {"variant_b", viol_b}, {"rows", lattice_rows}};
  cx.results["i1_discrepancies"] = discrepancies;
  cx.results["i1_variant_consistent_with_quadrature"] = identified;
  cx.checks.add("i1_quadrature_below_variants", identified != "none",
                {{"below_both", viol_a == 0 && viol_b == 0}, {"identified_variant", identified}});
  cx.checks.add("i2_decreasing_in_j", i2_monotone);
  cx.checks.add("columns_monotone_in_j", columns_monotone);
  cx.checks.add("measured_within_decomposition_bound", bound_ok, {{"slack", 0.01}});
  cx.write_csv(".csv", t);
}

// ---------------------------------------------------------------- sweep-homotopy

void cmd_sweep_homotopy(Context& cx) {
  cx.quadrature_tolerances();
  Phi2Spec spec = plan_from_json(cx.object(cx.at("plan")));
  const std::vector<double> ts = cx.has("t") ? number_list(cx.at("t")) : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
  const SolverConfig sc = solver_config(cx);
  const double h = cx.h(1.0 / 24.0);
  const bool continuation = cx.get("continuation", true);
  cx.tolerances["solver"] = {{"rel_tol", sc.rel_tol}, {"max_sweeps", sc.max_sweeps}};
  CsvTable t({"t", "energy", "sweeps", "converged", "singular_cells", "degree_sum", "boundary_degree"});
  ordered_json rows = ordered_json::array();
  std::optional<BallField> prev;
  for (double a : ts) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep-homotopy: t values must lie in [0, 1]");
    spec.amplitude = a;
    const SphereMap m = build_phi2(spec);
    const MinimizeResult res = minimize(m, h, sc, continuation && prev ? &*prev : nullptr);
    const SingularityReport sr = detect_singularities(res.best_field());
    const EnergyReport& br = res.best_report();
    rows.push_back({{"t", a}, {"energy", br.energy}, {"sweeps", br.sweeps}, {"converged", br.converged},
                    {"singular_cells", sr.cells.size()}, {"degree_sum", sr.interior_degree_sum}, {"boundary_degree", sr.total_boundary_degree}});
    t.row({CsvTable::field(a), CsvTable::field(br.energy), CsvTable::field(static_cast<long long>(br.sweeps)), br.converged ? "1" : "0",
           CsvTable::field(static_cast<long long>(sr.cells.size())), CsvTable::field(static_cast<long long>(sr.interior_degree_sum)),
           CsvTable::field(static_cast<long long>(sr.total_boundary_degree))});
    prev = res.best_field();
  }
  cx.results["plan"] = plan_to_json(spec);
  cx.results["h"] = h;
  cx.results["continuation"] = continuation;
  cx.results["rows"] = rows;
  cx.write_csv(".csv", t);
}

using Command = std::function<void(Context&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table = {
      {"construct", cmd_construct},         {"energy", cmd_energy},
      {"degree", cmd_degree},               {"minimize", cmd_minimize},
      {"detect", cmd_detect},               {"verify-lemma34", cmd_verify_lemma34},
      {"verify-coarea", cmd_verify_coarea}, {"verify-caps", cmd_verify_caps},
      {"sweep-homotopy", cmd_sweep_homotopy},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"construct", "energy", "degree", "minimize", "detect",
                                                 "verify-lemma34", "verify-coarea", "verify-caps", "sweep-homotopy"};
  return names;
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.command = j.at("command").get<std::string>();
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw ConfigError("config: params must be an object");
      c.params = j.at("params");
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.threads = j.value("threads", 0);
    if (j.contains("resolution")) c.resolution = GridResolution::parse(j.at("resolution").get<std::string>());
    if (j.contains("h")) c.h = j.at("h").get<double>();
    if (j.contains("output")) {
      const fs::path o = j.at("output").get<std::string>();
      c.output_dir = o.is_absolute() || base_dir.empty() ? o : base_dir / o;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

ordered_json ExperimentConfig::echo() const {
  ordered_json j = {{"command", command}, {"params", params}, {"seed", seed}, {"threads", threads}};
  j["resolution"] = resolution ? ordered_json(std::to_string(resolution->n_phi) + "x" + std::to_string(resolution->n_theta)) : ordered_json(nullptr);
  j["h"] = h ? ordered_json(*h) : ordered_json(nullptr);
  return j;
}

std::string ExperimentConfig::stem() const {
  if (params.contains("name") && params.at("name").is_string()) return params.at("name").get<std::string>();
  return command;
}

ExperimentResult run(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto it = commands().find(cfg.command);
  if (it == commands().end()) {
    out.exit_code = kExitConfig;
    out.message = "unknown command '" + cfg.command + "'";
    return out;
  }
  const int saved_threads = thread_count();
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  Context cx(cfg);
  std::string numerical_error;
  try {
    fs::create_directories(cfg.output_dir);
    it->second(cx);
  } catch (const ConfigError& e) {
    out.message = e.what();
  } catch (const nlohmann::json::exception& e) {
    out.message = std::string(cfg.command) + ": " + e.what();
  } catch (const NumericalError& e) {
    numerical_error = e.what();
  } catch (const std::invalid_argument& e) {
    out.message = e.what();
  } catch (const std::domain_error& e) {
    out.message = e.what();
  } catch (const std::out_of_range& e) {
    out.message = e.what();
  } catch (const fs::filesystem_error& e) {
    out.message = e.what();
  }
  set_thread_count(saved_threads);
  if (!out.message.empty()) {
    out.exit_code = kExitConfig;
    return out;
  }
  if (!numerical_error.empty()) cx.checks.add("numerical_certification", false, {{"error", numerical_error}});

  out.exit_code = cx.checks.ok() ? kExitOk : kExitAssertion;
  if (!cx.checks.ok()) out.message = numerical_error.empty() ? "one or more checks failed" : numerical_error;
  out.summary = {{"command", cfg.command},
                 {"build_id", build_id()},
                 {"seed", cfg.seed},
                 {"config", cfg.echo()},
                 {"status", cx.checks.ok() ? "ok" : "assertion_failed"},
                 {"tolerances", cx.tolerances},
                 {"results", cx.results},
                 {"checks", cx.checks.json()}};
  const fs::path summary = cx.out(".json");
  write_file_atomic(summary, dump_json(out.summary) + "\n");
  out.files.push_back(summary);
  out.files.insert(out.files.end(), cx.files.begin(), cx.files.end());
  return out;
}

}  // namespace bubblelab
