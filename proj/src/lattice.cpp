#include "bubblelab/lattice.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "bubblelab/kernels.hpp"
#include "bubblelab/parallel.hpp"
#include "bubblelab/quadrature.hpp"
#include "bubblelab/sphere.hpp"

namespace bubblelab {

std::shared_ptr<const BallLattice> BallLattice::build(double h) {
  if (!(h >= 1.0 / 64.0 - 1e-12 && h <= 1.0 / 8.0 + 1e-12)) throw std::domain_error("build_lattice: h outside [1/64, 1/8]");
  auto L = std::make_shared<BallLattice>();
  L->h_ = h;
  const int m = static_cast<int>(std::ceil((1.0 + 0.5 * h) / h)) + 1;
  L->n_ = 2 * m + 8;
  const int n = L->n_;
  L->kind_.assign(L->size(), 0);
  L->act_.assign(L->padded_size(), 0.0);
  L->inter_.assign(L->padded_size(), 0.0);
  const double r_in = 1.0 - 0.5 * h, r_out = 1.0 + 0.5 * h;
  L->plane_span_begin_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k < n; ++k) {
    L->plane_span_begin_[k] = L->spans_.size();
    for (int j = 0; j < n; ++j) {
      int run = -1;
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = L->index(i, j, k);
        const double r = norm(Vec3{L->coord(i), L->coord(j), L->coord(k)});
        NodeKind kind = NodeKind::outside;
        if (r < r_in) kind = NodeKind::interior;
        else if (r <= r_out) kind = NodeKind::boundary;
        L->kind_[idx] = static_cast<std::uint8_t>(kind);
        if (kind == NodeKind::interior) {
          L->interior_.push_back(idx);
          L->inter_[idx] = 1.0;
          if (run < 0) run = i;
        } else if (run >= 0) {
          L->spans_.push_back({j, k, run, i - 1});
          run = -1;
        }
        if (kind == NodeKind::boundary) {
          L->boundary_.push_back(idx);
          L->projection_.push_back(UnitVec3(Vec3{L->coord(i), L->coord(j), L->coord(k)}));
        }
        if (kind != NodeKind::outside) L->act_[idx] = 1.0;
      }
      if (run >= 0) throw std::logic_error("build_lattice: interior run reaches the box edge");
    }
  }
  L->plane_span_begin_[n] = L->spans_.size();
  return L;
}

Vec3 BallLattice::position(std::size_t idx) const {
  const std::size_t nn = static_cast<std::size_t>(n_) * n_;
  const int k = static_cast<int>(idx / nn);
  const int j = static_cast<int>((idx % nn) / n_);
  const int i = static_cast<int>(idx % n_);
  return {coord(i), coord(j), coord(k)};
}

std::array<std::size_t, 6> BallLattice::neighbors(std::size_t idx) const {
  const std::size_t n = static_cast<std::size_t>(n_), nn = n * n;
  return {idx - 1, idx + 1, idx - n, idx + n, idx - nn, idx + nn};
}

BallField::BallField(std::shared_ptr<const BallLattice> lat) : lat_(std::move(lat)) {
  if (!lat_) throw std::invalid_argument("BallField: null lattice");
  ux.assign(lat_->padded_size(), 0.0);
  uy.assign(lat_->padded_size(), 0.0);
  uz.assign(lat_->padded_size(), 0.0);
}

void sample_boundary(const MapEvaluator& m, BallField& u) {
  const auto& nodes = u.lattice().boundary_nodes();
  const auto& proj = u.lattice().boundary_projection();
  parallel_chunks(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) u.set(nodes[i], normalize(m.value(proj[i])));
  });
}

void radial_fill(const MapEvaluator& m, BallField& u) {
  const auto& nodes = u.lattice().interior_nodes();
  parallel_chunks(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) u.set(nodes[i], normalize(m.value(normalize(u.lattice().position(nodes[i])))));
  });
}

void random_fill(std::uint64_t seed, BallField& u) {
  std::mt19937_64 rng(seed);
  // 53-bit uniforms from raw engine output, so the stream is portable.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t idx : u.lattice().interior_nodes()) {
    const double z = 2.0 * uniform() - 1.0;
    const double t = kTwoPi * uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    u.set(idx, normalize(Vec3{s * std::cos(t), s * std::sin(t), z}));
  }
}

double dirichlet_energy(const BallField& u, int threads) {
  const BallLattice& L = u.lattice();
  const int n = L.n();
  const kernels::EnergyArgs args{n, u.ux.data(), u.uy.data(), u.uz.data(), L.active_mask().data(), L.interior_mask().data()};
  const kernels::KernelSet& ks = kernels::active_kernels();
  std::vector<double> planes(static_cast<std::size_t>(n), 0.0);
  parallel_chunks(
      static_cast<std::size_t>(n),
      [&](std::size_t b, std::size_t e) {
        std::vector<double> rows(static_cast<std::size_t>(n));
        for (std::size_t k = b; k < e; ++k) {
          for (int j = 0; j < n; ++j) rows[j] = ks.energy_row(args, j, static_cast<int>(k));
          planes[k] = pairwise_sum(rows);
        }
      },
      threads > 0 ? threads : thread_count());
  return pairwise_sum(planes) * L.h();
}

}  // namespace bubblelab
