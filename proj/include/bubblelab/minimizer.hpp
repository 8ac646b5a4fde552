#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/lattice.hpp"

namespace bubblelab {

struct SolverConfig {
  int max_sweeps = 500;
  double rel_tol = 1e-9;
  int restarts = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: process default

  void validate() const;
};

struct EnergyReport {
  double energy = 0.0;
  int sweeps = 0;
  std::vector<double> energy_trace;  // initial energy, then one entry per accepted sweep
  long degenerate_updates = 0;       // nodes kept because their neighbour sum vanished
  bool converged = false;            // stopped by rel_tol (not by max_sweeps)
  std::uint64_t start_seed = 0;      // 0 for the radial start
  bool radial_start = false;
};

/// Projected Gauss-Seidel in red-black order until the relative energy
/// decrease drops below rel_tol or max_sweeps is reached. A sweep that would
/// raise the energy (possible only through rounding) is undone and ends the run.
EnergyReport relax(BallField& u, const SolverConfig& cfg);

struct MinimizeResult {
  std::vector<BallField> fields;     // one per start, in start order
  std::vector<EnergyReport> reports;
  std::size_t best = 0;              // lowest energy; ties go to the earlier start

  const BallField& best_field() const { return fields[best]; }
  const EnergyReport& best_report() const { return reports[best]; }
};

/// Multi-start heuristic: start 0 is the radial fill m(x/|x|), starts r >= 1
/// are random unit fields seeded with start_seed(cfg.seed, r). `warm` replaces
/// start 0 when given (its boundary is resampled from m).
MinimizeResult minimize(const MapEvaluator& m, double h, const SolverConfig& cfg, const BallField* warm = nullptr);

std::uint64_t start_seed(std::uint64_t seed, int restart);

}  // namespace bubblelab
