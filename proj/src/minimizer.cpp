#include "bubblelab/minimizer.hpp"

#include <stdexcept>

#include "bubblelab/kernels.hpp"
#include "bubblelab/parallel.hpp"

namespace bubblelab {

void SolverConfig::validate() const {
  if (max_sweeps < 1) throw std::invalid_argument("solver: max_sweeps must be positive");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("solver: rel_tol must be positive");
  if (restarts < 1) throw std::invalid_argument("solver: restarts must be positive");
  if (threads < 0) throw std::invalid_argument("solver: threads must be non-negative");
}

namespace {

long sweep(BallField& u, int threads) {
  const BallLattice& L = u.lattice();
  const kernels::RelaxArgs args{L.n(), u.ux.data(), u.uy.data(), u.uz.data(), L.spans().data()};
  const kernels::KernelSet& ks = kernels::active_kernels();
  const auto& pb = L.plane_span_begin();
  const std::size_t planes = pb.size() - 1;
  long degenerate = 0;
  for (int color = 0; color < 2; ++color) {
    std::vector<long> counts(planes, 0);
    parallel_chunks(
        planes,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t k = b; k < e; ++k) counts[k] = ks.relax(args, color, pb[k], pb[k + 1]);
        },
        threads);
    for (long c : counts) degenerate += c;
  }
  return degenerate;
}

}  // namespace

EnergyReport relax(BallField& u, const SolverConfig& cfg) {
  cfg.validate();
  const int threads = cfg.threads > 0 ? cfg.threads : thread_count();
  EnergyReport rep;
  double e = dirichlet_energy(u, threads);
  rep.energy_trace.push_back(e);
  BallField backup = u;
  for (int s = 0; s < cfg.max_sweeps && e > 0.0; ++s) {
    backup.ux = u.ux;
    backup.uy = u.uy;
    backup.uz = u.uz;
    rep.degenerate_updates += sweep(u, threads);
    const double en = dirichlet_energy(u, threads);
    if (en > e) {
      u = backup;
      rep.converged = true;
      break;
    }
    const double rel = (e - en) / e;
    e = en;
    rep.energy_trace.push_back(e);
    ++rep.sweeps;
    if (rel < cfg.rel_tol) {
      rep.converged = true;
      break;
    }
  }
  if (e == 0.0) rep.converged = true;
  rep.energy = e;
  return rep;
}

std::uint64_t start_seed(std::uint64_t seed, int restart) {
  // splitmix64 of (seed, restart): distinct, well-mixed streams per start.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MinimizeResult minimize(const MapEvaluator& m, double h, const SolverConfig& cfg, const BallField* warm) {
  cfg.validate();
  auto lat = warm ? warm->lattice_ptr() : BallLattice::build(h);
  MinimizeResult out;
  for (int r = 0; r < cfg.restarts; ++r) {
    BallField u(lat);
    sample_boundary(m, u);
    std::uint64_t sd = 0;
    if (r == 0 && warm) {
      for (std::size_t idx : lat->interior_nodes()) u.set(idx, warm->at(idx));
    } else if (r == 0) {
      radial_fill(m, u);
    } else {
      sd = start_seed(cfg.seed, r);
      random_fill(sd, u);
    }
    EnergyReport rep = relax(u, cfg);
    rep.start_seed = sd;
    rep.radial_start = r == 0 && !warm;
    out.fields.push_back(std::move(u));
    out.reports.push_back(std::move(rep));
    if (out.reports.back().energy < out.reports[out.best].energy) out.best = out.reports.size() - 1;
  }
  return out;
}

}  // namespace bubblelab
