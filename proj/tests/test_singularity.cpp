#include <cmath>
#include <functional>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/lattice.hpp"
#include "bubblelab/minimizer.hpp"
#include "bubblelab/quadrature.hpp"
#include "bubblelab/singularity.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace bubblelab;

namespace {

// Solid angle of a spherical triangle from L'Huilier's theorem, signed by orientation.
double lhuilier(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double x = angle_between(b, c), y = angle_between(c, a), z = angle_between(a, b);
  const double s = (x + y + z) / 2.0;
  const double t = std::tan(s / 2) * std::tan((s - x) / 2) * std::tan((s - y) / 2) * std::tan((s - z) / 2);
  const double e = 4.0 * std::atan(std::sqrt(std::max(0.0, t)));
  return triple(a, b, c) >= 0.0 ? e : -e;
}

// Fills every active node with f(position).
BallField field_of(double h, const std::function<Vec3(const Vec3&)>& f) {
  BallField u(BallLattice::build(h));
  const BallLattice& L = u.lattice();
  for (std::size_t idx = 0; idx < L.size(); ++idx)
    if (L.kind(idx) != NodeKind::outside) u.set(idx, normalize(f(L.position(idx))));
  return u;
}

Cell origin_cell(const BallLattice& L) { return {L.n() / 2 - 1, L.n() / 2 - 1, L.n() / 2 - 1}; }

Cell cell_containing(const BallLattice& L, const Vec3& a) {
  auto idx = [&](double x) { return static_cast<int>(std::floor(x / L.h() + L.n() / 2 - 0.5)); };
  return {idx(a.x), idx(a.y), idx(a.z)};
}

bool same_cell(const Cell& a, const Cell& b) { return a.i == b.i && a.j == b.j && a.k == b.k; }

}  // namespace

TEST_CASE("property: solid angle matches L'Huilier") {
  gen::Rng rng(61);
  for (int c = 0; c < gen::kCases; ++c) {
    CAPTURE(c);
    const UnitVec3 a = rng.unit(), b = rng.unit(), d = rng.unit();
    CHECK(solid_angle(a.vec(), b.vec(), d.vec()) == doctest::Approx(lhuilier(a.vec(), b.vec(), d.vec())).epsilon(1e-9));
  }
  // Octant triangle covers one eighth of the sphere.
  CHECK(solid_angle({1, 0, 0}, {0, 1, 0}, {0, 0, 1}) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(solid_angle({1, 0, 0}, {0, 0, 1}, {0, 1, 0}) == doctest::Approx(-kPi / 2).epsilon(1e-14));
}

TEST_CASE("cell degrees of elementary fields") {
  const double h = 1.0 / 8.0;
  const BallField k = field_of(h, [](const Vec3&) { return Vec3{0, 0, 1}; });
  const BallField radial = field_of(h, [](const Vec3& x) { return x; });
  const BallField mirror = field_of(h, [](const Vec3& x) { return Vec3{x.x, x.y, -x.z}; });
  const Cell o = origin_cell(radial.lattice());

  const CellDegree r0 = cell_degree(radial, o);
  CHECK(r0.degree == 1);
  CHECK(r0.raw == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cell_degree(mirror, o).degree == -1);
  CHECK(cell_degree(k, o).degree == 0);
  CHECK(cell_degree(radial, {o.i + 1, o.j, o.k}).degree == 0);
  CHECK(cell_degree(radial, {o.i - 2, o.j + 1, o.k}).degree == 0);
}

TEST_CASE("property: a translated hedgehog has degree one in its own cell only") {
  gen::Rng rng(62);
  const double h = 1.0 / 8.0;
  for (int c = 0; c < 10; ++c) {
    CAPTURE(c);
    const Vec3 a{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    const int s = c % 2 ? -1 : 1;
    const BallField u = field_of(h, [&](const Vec3& x) { return Vec3{x.x - a.x, x.y - a.y, s * (x.z - a.z)}; });
    const SingularityReport rep = detect_singularities(u);
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.cells[0].degree == s);
    CHECK(same_cell(rep.cells[0].cell, cell_containing(u.lattice(), a)));
    CHECK(rep.total_boundary_degree == s);
    CHECK(rep.conserved());
  }
}

TEST_CASE("property: total defect degree is conserved") {
  gen::Rng rng(63);
  const double h = 1.0 / 10.0;
  int checked = 0;
  for (int c = 0; c < 12; ++c) {
    CAPTURE(c);
    const Vec3 a{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const Vec3 b{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const double sa = rng.uniform(0.5, 2.0), sb = rng.uniform(-2.0, 2.0);
    // Superposed point charges: zeros and their degrees vary with the draw.
    const BallField u = field_of(h, [&](const Vec3& x) {
      const Vec3 da = x - a, db = x - b;
      return sa * da / std::pow(norm(da), 3) + sb * db / std::pow(norm(db), 3) + Vec3{0.1, 0.2, 0.3};
    });
    const SingularityReport rep = detect_singularities(u);
    if (!rep.unresolved.empty()) continue;
    ++checked;
    CHECK(rep.conserved());
    int sum = 0;
    for (const auto& s : rep.cells) sum += s.degree;
    for (const auto& s : rep.trace_cells) sum += s.degree;
    CHECK(sum == rep.total_boundary_degree);
  }
  CHECK(checked >= 6);
}

TEST_CASE("detection on the radial minimizer") {
  SolverConfig cfg;
  cfg.max_sweeps = 2000;
  const MinimizeResult r = minimize(IdentityMap(), 1.0 / 8.0, cfg);
  const SingularityReport rep = detect_singularities(r.best_field(), 1);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].degree == 1);
  CHECK(norm(rep.cells[0].center) <= 2.0 / 8.0);
  CHECK(rep.total_boundary_degree == 1);
  CHECK(rep.conserved());
  const auto j = rep.to_json();
  CHECK(j.at("conserved").get<bool>());
  CHECK(j.at("map_degree").get<int>() == 1);
}

TEST_CASE("fiber length of the hedgehog is a unit ray") {
  const BallField u = field_of(1.0 / 16.0, [](const Vec3& x) { return x; });
  gen::Rng rng(64);
  for (int c = 0; c < 8; ++c) {
    CAPTURE(c);
    const UnitVec3 w = rng.unit();
    const FiberSample f = fiber_sample(u, w);
    CHECK(f.valid());
    CHECK(f.length == doctest::Approx(1.0).epsilon(0.03));
  }
  const BallField k = field_of(1.0 / 16.0, [](const Vec3&) { return Vec3{0, 0, 1}; });
  CHECK(fiber_length(k, UnitVec3(1, 0, 0)) == 0.0);
}

TEST_CASE("co-area identity for the hedgehog") {
  const BallField u = field_of(1.0 / 32.0, [](const Vec3& x) { return x; });
  const CoareaResult c = coarea_check(u, build_quad_grid(16, 32));
  CHECK(c.rhs == doctest::Approx(c.lhs).epsilon(0.05));
  CHECK(c.rhs == doctest::Approx(8.0 * kPi).epsilon(0.05));

  const BallField k = field_of(1.0 / 16.0, [](const Vec3&) { return Vec3{0, 0, 1}; });
  const CoareaResult z = coarea_check(k, build_quad_grid(8, 16));
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
}

TEST_CASE("scanned cells have all corners active") {
  const auto L = BallLattice::build(1.0 / 8.0);
  const auto cells = scanned_cells(*L);
  CHECK_FALSE(cells.empty());
  for (std::size_t c : cells)
    for (int d = 0; d < 8; ++d) {
      const std::size_t idx = c + (d & 1) + ((d >> 1) & 1) * L->n() + ((d >> 2) & 1) * L->n() * L->n();
      CHECK(L->kind(idx) != NodeKind::outside);
    }
}
