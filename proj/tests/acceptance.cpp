// Acceptance runner: executes the experiment configs, evaluates criteria 1-10
// against thresholds pinned below and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bubblelab/construction.hpp"
#include "bubblelab/experiments.hpp"
#include "bubblelab/sphere.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace bubblelab;

namespace {

constexpr double kEightPi = 8.0 * kPi;

// Criterion 1
constexpr double kRadialEnergyLo = 0.9;
constexpr double kRadialEnergyHi = 1.1;
constexpr int kRadialMaxSweeps = 500;
constexpr double kRadialCenterInH = 2.0;
constexpr double kRadialSeconds = 120.0;
// Criterion 2
constexpr double kCapLastRel = 0.03;
constexpr double kCapConformal = 0.005;
// Criterion 3
constexpr double kDecayFraction = 0.25;
constexpr double kSharpFraction = 0.9;
// Criterion 4
constexpr double kI1Slack = 1e-6;
// Criterion 6
constexpr double kAxisInH = 2.0;
constexpr double kSingularSeconds = 15.0 * 60.0;
// Criterion 7
constexpr double kCoareaEquality = 0.05;
constexpr double kCoareaInequality = 0.95;
// Criterion 8
constexpr double kChainSlack = 1e-3;
constexpr double kSupportSlack = 1.02;

const std::vector<std::string> kConfigs = {
    "c1_radial_minimizer", "c2_bubble_caps",       "c3_lemma34",           "c5_degree_constant",
    "c5_degree_wobble",    "c5_degree_fold",       "c6_singularities_n1",  "c6_singularities_n2",
    "c7_coarea_radial",    "c8_budget_chain",      "c9_lemma33_identity",  "c9_lemma33_wobble",
};

struct Run {
  ExperimentConfig cfg;
  ExperimentResult result;
  double seconds = 0.0;
};

using Runs = std::map<std::string, Run>;

Runs run_all(const fs::path& exp_dir, const fs::path& out_dir, bool verbose) {
  Runs runs;
  fs::create_directories(out_dir);
  for (const auto& name : kConfigs) {
    Run r;
    r.cfg = ExperimentConfig::load(exp_dir / (name + ".json"));
    r.cfg.output_dir = out_dir;
    const auto t0 = std::chrono::steady_clock::now();
    r.result = run(r.cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (verbose)
      std::fprintf(stderr, "  ran %-22s exit %d  %.1f s\n", name.c_str(), r.result.exit_code, r.seconds);
    runs.emplace(name, std::move(r));
  }
  return runs;
}

const ordered_json& results(const Runs& runs, const std::string& name) { return runs.at(name).result.summary.at("results"); }

bool check_passed(const Runs& runs, const std::string& name, const std::string& check) {
  for (const auto& c : runs.at(name).result.summary.at("checks"))
    if (c.at("name") == check) return c.at("passed").get<bool>();
  return false;
}

struct Verdict {
  bool pass = true;
  std::ostringstream why;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) why << "; ";
      why << what;
      pass = false;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Verdict criterion1(const Runs& runs) {
  Verdict v;
  const auto& r = results(runs, "c1_radial_minimizer");
  const double e = r.at("best").at("energy").get<double>();
  const int sweeps = r.at("best").at("sweeps").get<int>();
  const double h = r.at("h").get<double>();
  v.require(e >= kRadialEnergyLo * kEightPi && e <= kRadialEnergyHi * kEightPi, "energy " + fmt(e) + " outside [0.9, 1.1]*8pi");
  v.require(sweeps <= kRadialMaxSweeps, "sweeps " + std::to_string(sweeps));
  const auto& cells = r.at("singularities").at("cells");
  v.require(cells.size() == 1, std::to_string(cells.size()) + " singular cells");
  if (cells.size() == 1) {
    const auto& c = cells[0];
    v.require(c.at("degree").get<int>() == 1, "degree " + c.at("degree").dump());
    const Vec3 x{c.at("center")[0].get<double>(), c.at("center")[1].get<double>(), c.at("center")[2].get<double>()};
    v.require(norm(x) <= kRadialCenterInH * h, "center at distance " + fmt(norm(x)));
  }
  const double t = runs.at("c1_radial_minimizer").seconds;
  v.require(t < kRadialSeconds, "runtime " + fmt(t) + " s");
  v.why << (v.pass ? "" : " | ") << "energy=" << fmt(e) << " sweeps=" << sweeps << " cells=" << cells.size() << " t=" << fmt(t) << "s";
  return v;
}

Verdict criterion2(const Runs& runs) {
  Verdict v;
  const auto& rows = results(runs, "c2_bubble_caps").at("rows");
  std::vector<double> e;
  for (const auto& row : rows) {
    e.push_back(row.at("energy").get<double>());
    const double ratio = row.at("energy_over_2area").get<double>();
    v.require(std::abs(ratio - 1.0) <= kCapConformal, "j=" + row.at("j").dump() + " E/(2A)=" + fmt(ratio));
  }
  for (std::size_t i = 1; i < e.size(); ++i)
    v.require(e[i] > e[i - 1], "E(j=" + rows[i].at("j").dump() + ")=" + fmt(e[i]) + " not above " + fmt(e[i - 1]));
  const double last = std::abs(e.back() - kEightPi) / kEightPi;
  v.require(last <= kCapLastRel, "last relative error " + fmt(last));
  return v;
}

std::vector<const ordered_json*> lemma_rows(const Runs& runs, double p) {
  std::vector<const ordered_json*> out;
  for (const auto& row : results(runs, "c3_lemma34").at("rows"))
    if (row.at("p").get<double>() == p) out.push_back(&row);
  return out;
}

Verdict criterion3(const Runs& runs) {
  Verdict v;
  for (double p : {1.0, 1.5}) {
    const auto rows = lemma_rows(runs, p);
    v.require(rows.size() == 5, "p=" + fmt(p) + " has " + std::to_string(rows.size()) + " rows");
    if (rows.empty()) continue;
    for (std::size_t i = 1; i < rows.size(); ++i)
      v.require(rows[i]->at("measured_seminorm_p").get<double>() < rows[i - 1]->at("measured_seminorm_p").get<double>(),
                "p=" + fmt(p) + " not decreasing at j=" + rows[i]->at("j").dump());
    const double first = rows.front()->at("measured_seminorm_p").get<double>();
    const double last = rows.back()->at("measured_seminorm_p").get<double>();
    // The seminorm distance is the p-th root of the measured p-th power.
    const double ratio = std::pow(last / first, 1.0 / p);
    v.require(ratio < kDecayFraction, "p=" + fmt(p) + " final/initial " + fmt(ratio));
  }
  const auto rows2 = lemma_rows(runs, 2.0);
  v.require(rows2.size() == 5, "p=2 rows missing");
  for (const auto* row : rows2) {
    const double s = row->at("measured_seminorm_p").get<double>();
    v.require(s >= kSharpFraction * kEightPi, "p=2 j=" + row->at("j").dump() + " seminorm^2 " + fmt(s));
  }
  return v;
}

Verdict criterion4(const Runs& runs) {
  Verdict v;
  int viol_a = 0, viol_b = 0, lattice = 0;
  std::map<double, std::vector<double>> i2;
  for (const auto& row : results(runs, "c3_lemma34").at("rows")) {
    if (row.at("I1_quad").is_null()) continue;
    ++lattice;
    const double q = row.at("I1_quad").get<double>();
    viol_a += q > row.at("I1_a").get<double>() + kI1Slack;
    viol_b += q > row.at("I1_b").get<double>() + kI1Slack;
    i2[row.at("p").get<double>()].push_back(row.at("I2").get<double>());
  }
  v.require(lattice > 0, "no I1 rows");
  const std::string logged = results(runs, "c3_lemma34").at("i1_variant_consistent_with_quadrature").get<std::string>();
  std::string expected = "none";
  if (viol_a == 0 && viol_b == 0) expected = "both";
  else if (viol_a == 0) expected = "a";
  else if (viol_b == 0) expected = "b";
  v.require(expected != "none", "I1 quadrature exceeds both variants");
  v.require(logged == expected, "logged variant '" + logged + "' but rows say '" + expected + "'");
  for (const auto& [p, col] : i2)
    for (std::size_t i = 1; i < col.size(); ++i) v.require(col[i] < col[i - 1], "I2 not monotone at p=" + fmt(p));
  v.why << (v.pass ? "" : " | ") << "violations a=" << viol_a << " b=" << viol_b << " of " << lattice << ", consistent variant: " << logged;
  return v;
}

Verdict criterion5(const Runs& runs) {
  Verdict v;
  for (const char* name : {"c5_degree_constant", "c5_degree_wobble", "c5_degree_fold"}) {
    const auto& r = results(runs, name);
    for (const char* key : {"degree_phi", "degree_phi1", "degree_phi2"})
      v.require(std::lround(r.at(key).get<double>()) == 0, std::string(name) + " " + key + " = " + fmt(r.at(key).get<double>()));
    const auto& caps = r.at("caps");
    v.require(caps.size() == 2 * r.at("N").get<std::size_t>(), std::string(name) + " cap count");
    int sum = 0;
    for (const auto& c : caps) {
      const long d = std::lround(c.at("degree_integral").get<double>());
      v.require(std::abs(d) == 1 && d == c.at("expected").get<int>(), std::string(name) + " cap degree " + std::to_string(d));
      sum += static_cast<int>(d);
      for (const auto& rv : c.at("regular_values"))
        v.require(rv.at("certified").get<bool>() && rv.at("degree").get<int>() == d, std::string(name) + " cap regular value");
    }
    v.require(sum == 0, std::string(name) + " cap degrees not mirror-opposite");
    for (const auto& [which, list] : r.at("regular_values").items())
      for (const auto& rv : list)
        v.require(rv.at("certified").get<bool>() && rv.at("degree").get<int>() == 0, std::string(name) + " regular value on " + which);
  }
  return v;
}

double axis_distance(const Vec3& c, const std::vector<UnitVec3>& axes) {
  double best = 1e300;
  for (const auto& a : axes) best = std::min(best, norm(c - dot(c, a.vec()) * a.vec()));
  return best;
}

Verdict criterion6(const Runs& runs) {
  Verdict v;
  double total = 0.0;
  for (const auto& [name, need] : std::vector<std::pair<std::string, std::size_t>>{{"c6_singularities_n1", 2}, {"c6_singularities_n2", 4}}) {
    const Run& run = runs.at(name);
    const auto& r = results(runs, name);
    const Phi2Spec plan = plan_from_json(run.cfg.params.at("boundary"));
    const double h = r.at("h").get<double>();
    std::size_t plus = 0, minus = 0;
    for (const auto& c : r.at("singularities").at("cells")) {
      const Vec3 x{c.at("center")[0].get<double>(), c.at("center")[1].get<double>(), c.at("center")[2].get<double>()};
      if (axis_distance(x, plan.xis) > kAxisInH * h) continue;
      const int d = c.at("degree").get<int>();
      plus += d == 1;
      minus += d == -1;
    }
    v.require(plus + minus >= need && plus > 0 && minus > 0,
              name + ": " + std::to_string(plus) + " (+1) and " + std::to_string(minus) + " (-1) cells near the cap axes");
    total += run.seconds;
    v.why << (v.pass ? "" : " | ") << name << " +" << plus << "/-" << minus << " ";
  }
  v.require(total < kSingularSeconds, "runtime " + fmt(total) + " s");
  v.why << "t=" << fmt(total) << "s";
  return v;
}

Verdict criterion7(const Runs& runs) {
  Verdict v;
  const auto& eq = results(runs, "c7_coarea_radial").at("coarea");
  const double lhs = eq.at("lhs").get<double>(), rhs = eq.at("rhs").get<double>();
  v.require(std::abs(lhs - rhs) <= kCoareaEquality * rhs, "x/|x|: lhs " + fmt(lhs) + " rhs " + fmt(rhs));
  for (const char* name : {"c1_radial_minimizer", "c6_singularities_n1", "c6_singularities_n2"}) {
    const auto& r = results(runs, name);
    if (!r.at("best").at("converged").get<bool>()) continue;
    const double l = r.at("coarea").at("lhs").get<double>(), rr = r.at("coarea").at("rhs").get<double>();
    v.require(l >= kCoareaInequality * rr, std::string(name) + ": lhs/rhs = " + fmt(l / rr));
  }
  return v;
}

Verdict criterion8(const Runs& runs) {
  Verdict v;
  const auto& r = results(runs, "c8_budget_chain");
  v.require(r.at("base_map").at("kind") == "wobble" && r.at("N").get<int>() == 2, "plan is not wobble N=2");
  for (const auto& row : r.at("budget_chain")) {
    const double lhs = row.at("w1p_distance").get<double>(), rhs = row.at("chain_total").get<double>();
    v.require(lhs <= rhs + kChainSlack, "p=" + fmt(row.at("p").get<double>()) + ": " + fmt(lhs) + " > " + fmt(rhs));
  }
  const double delta = r.at("delta").get<double>();
  const double support = r.at("diff_support_area").get<double>();
  v.require(support <= 8.0 * kPi * delta * delta * kSupportSlack, "support " + fmt(support));
  return v;
}

Verdict criterion9(const Runs& runs) {
  Verdict v;
  for (const char* name : {"c9_lemma33_identity", "c9_lemma33_wobble"}) {
    const auto& rows = results(runs, name).at("lemma33");
    v.require(rows.size() >= 2, std::string(name) + " has fewer than two deltas");
    for (const auto& row : rows)
      v.require(row.at("h1_distance").get<double>() <= row.at("bound").get<double>(),
                std::string(name) + " delta=" + fmt(row.at("delta").get<double>()));
  }
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion10(const Runs& first, const Runs& second) {
  Verdict v;
  std::size_t compared = 0;
  for (const auto& [name, run] : first) {
    const auto& other = second.at(name);
    v.require(run.result.files.size() == other.result.files.size(), name + ": file lists differ");
    for (std::size_t i = 0; i < run.result.files.size() && i < other.result.files.size(); ++i) {
      ++compared;
      v.require(slurp(run.result.files[i]) == slurp(other.result.files[i]), run.result.files[i].filename().string() + " differs");
    }
  }
  v.why << (v.pass ? "" : " | ") << compared << " files compared";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubblelab acceptance criteria 1-10"};
  std::string exp_dir = BUBBLELAB_EXPERIMENTS_DIR;
  std::string out_dir = "acceptance_out";
  bool quiet = false;
  app.add_option("--experiments", exp_dir, "directory holding the experiment configs");
  app.add_option("--output", out_dir, "scratch directory for the two runs");
  app.add_flag("--quiet", quiet, "do not list the individual runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path out = fs::absolute(out_dir);
  fs::remove_all(out);
  const Runs first = run_all(exp_dir, out / "run1", !quiet);
  const Runs second = run_all(exp_dir, out / "run2", !quiet);

  const std::vector<std::pair<const char*, Verdict>> verdicts = [&] {
    std::vector<std::pair<const char*, Verdict>> v;
    v.emplace_back("radial-map oracle", criterion1(first));
    v.emplace_back("bubble cap energy", criterion2(first));
    v.emplace_back("W1p convergence and p=2 sharpness", criterion3(first));
    v.emplace_back("I1/I2 closed forms", criterion4(first));
    v.emplace_back("degree pipeline", criterion5(first));
    v.emplace_back("singularity installation", criterion6(first));
    v.emplace_back("co-area", criterion7(first));
    v.emplace_back("budget chain", criterion8(first));
    v.emplace_back("H1 bound for phi1", criterion9(first));
    v.emplace_back("determinism", criterion10(first, second));
    return v;
  }();

  int failed = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& [title, v] = verdicts[i];
    failed += !v.pass;
    const std::string detail = v.why.str();
    std::printf("criterion %2zu %-36s %s%s%s\n", i + 1, title, v.pass ? "PASS" : "FAIL", detail.empty() ? "" : "  ", detail.c_str());
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(verdicts.size()) - failed, verdicts.size());
  return failed == 0 ? 0 : 1;
}
