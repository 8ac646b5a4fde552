#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/construction.hpp"
#include "bubblelab/degree.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/map_functionals.hpp"
#include "bubblelab/map_io.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace bubblelab;

namespace {

// Test-local maps with known degrees, independent of the library's catalogue.
class RationalMap final : public MapEvaluator {
 public:
  explicit RationalMap(int power) : power_(power) {}
  Vec3 value(const Vec3& x) const override {
    // Stereographic coordinate from the north pole, w ↦ w^k, and back.
    const std::complex<double> w = std::complex<double>(x.x, x.y) / (1.0 - x.z);
    const std::complex<double> v = std::pow(w, power_);
    const double a = std::norm(v);
    if (!std::isfinite(a)) return kNorthPole;
    return Vec3{2 * v.real() / (a + 1), 2 * v.imag() / (a + 1), (a - 1) / (a + 1)};
  }
  nlohmann::ordered_json describe() const override { return {{"kind", "test_rational"}, {"power", power_}}; }

 private:
  int power_;
};

class ReflectMap final : public MapEvaluator {
 public:
  Vec3 value(const Vec3& x) const override { return {x.x, x.y, -x.z}; }
  nlohmann::ordered_json describe() const override { return {{"kind", "test_reflect"}}; }
};

class RotatedIdentity final : public MapEvaluator {
 public:
  explicit RotatedIdentity(Rotation r) : r_(r) {}
  Vec3 value(const Vec3& x) const override { return r_.apply(x); }
  nlohmann::ordered_json describe() const override { return {{"kind", "test_rotated"}}; }

 private:
  Rotation r_;
};

struct Library {
  std::vector<std::pair<MapPtr, int>> maps;
};

Library test_library() {
  Library lib;
  auto add = [&](MapPtr m, int d) { lib.maps.emplace_back(std::move(m), d); };
  add(std::make_shared<ConstantMap>(UnitVec3(0.1, 0.2, 0.9)), 0);
  add(std::make_shared<IdentityMap>(), 1);
  add(std::make_shared<AntipodalMap>(), -1);
  add(std::make_shared<WobbleMap>(), 0);
  add(std::make_shared<FoldMap>(), 0);
  add(std::make_shared<ReflectMap>(), -1);
  add(std::make_shared<RationalMap>(2), 2);
  add(std::make_shared<RotatedIdentity>(Rotation::axis_angle(normalize(Vec3{1, 2, 3}), 0.7)), 1);
  BubbleSpec b;
  b.center = UnitVec3(0.36, 0.48, 0.8);
  b.j = 6;
  b.target = UnitVec3(0, 0, 1);
  b.profile = BubbleProfile::cone;
  add(std::make_shared<SphereMap>(std::make_shared<ConstantMap>(b.target), std::vector<Patch>{build_bubble(b)}), 1);
  b.orientation = -1;
  add(std::make_shared<SphereMap>(std::make_shared<ConstantMap>(b.target), std::vector<Patch>{build_bubble(b)}), -1);
  return lib;
}

}  // namespace

TEST_CASE("map evaluation basics") {
  const UnitVec3 c(0.3, 0.4, 0.5);
  ConstantMap k(c);
  IdentityMap id;
  gen::Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const UnitVec3 x = rng.unit();
    CHECK(k.value(x) == c.vec());
    CHECK(id.value(x) == x.vec());
  }
  // A patched map equals its base away from the patch caps.
  BubbleSpec b;
  b.center = UnitVec3(0, 0, 1);
  b.j = 8;
  b.target = c;
  SphereMap patched(std::make_shared<ConstantMap>(c), {build_bubble(b)});
  for (int i = 0; i < 200; ++i) {
    const UnitVec3 x = rng.unit();
    if (distance(x.vec(), b.center.vec()) >= 2.0 / b.j) CHECK(patched.value(x) == c.vec());
  }
}

TEST_CASE("tangent derivatives of the catalogue maps") {
  ConstantMap k(UnitVec3(0, 1, 0));
  IdentityMap id;
  gen::Rng rng(22);
  for (int i = 0; i < 50; ++i) {
    const UnitVec3 x = rng.unit_off_poles(0.05);
    const SphericalPoint p = to_spherical(x.vec());
    const TangentDeriv dk = tangent_deriv(k, p);
    CHECK(norm(dk.d_phi) == 0.0);
    CHECK(norm(dk.d_theta_scaled) == 0.0);
    CHECK(tangent_deriv(id, p).norm_sq() == doctest::Approx(2.0).epsilon(1e-8));
  }
}

TEST_CASE("bubble gradient matches the conformal factor") {
  BubbleSpec b;
  b.center = UnitVec3(0, 0, 1);
  b.j = 10;
  b.target = UnitVec3(0, 0, 1);
  BubbleEvaluator m(b);
  const BubbleConstants k = bubble_constants(b.j);
  // Independent oracle: inside the conformal piece the bubble is a Möbius map
  // of the stereographic plane, so |∇_T m|² = 2 (dF/dψ)² with F the target
  // polar angle and the radial stretch equal to the tangential one.
  for (double psi : {0.5 * k.beta, 0.9 * k.beta}) {
    const auto [F, dF] = m.profile(psi);
    const double tangential = std::sin(F) / std::sin(psi);
    CHECK(std::abs(dF) == doctest::Approx(tangential).epsilon(1e-3));
    const Vec3 x = Rotation::axis_angle(Vec3{1, 0, 0}, psi).apply(b.center.vec());
    QuadNode n;
    n.x = UnitVec3(x);
    const TangentFrame f = any_frame(x);
    n.t1 = f.e1;
    n.t2 = f.e2;
    CHECK(grad_sq(m, n, 1e-7 * psi) == doctest::Approx(2.0 * dF * dF).epsilon(1e-3));
  }
}

TEST_CASE("boundary energy oracles") {
  const SphereQuadGrid g = build_quad_grid(180, 360);
  CHECK(boundary_energy(ConstantMap(UnitVec3(0, 0, 1)), g) == 0.0);
  CHECK(boundary_energy(IdentityMap(), g) == doctest::Approx(8 * kPi).epsilon(0.005));
}

TEST_CASE("property: boundary energy is additive over a cap and its complement") {
  gen::Rng rng(23);
  WobbleMap w;
  const SphereQuadGrid g = build_quad_grid(90, 180);
  const double total = boundary_energy(w, g);
  for (int c = 0; c < 10; ++c) {
    CAPTURE(c);
    const SphericalCap cap(rng.unit(), rng.uniform(0.1, 1.5));
    const double in = boundary_energy(w, g, Region::cap(cap));
    const double out = boundary_energy(w, g, Region{{cap}, true});
    CHECK(std::abs(in + out - total) <= 1e-8 * total);
  }
}

TEST_CASE("W1p distance oracles") {
  const SphereQuadGrid g = build_quad_grid(90, 180);
  WobbleMap w;
  const W1pDistance same = w1p_dist(w, w, 1.5, g);
  CHECK(same.norm == 0.0);
  CHECK(same.seminorm == 0.0);
  CHECK_THROWS_AS(w1p_dist(w, w, 2.5, g), std::domain_error);
}

TEST_CASE("property: measure-normalized W1p seminorm is nondecreasing in p") {
  gen::Rng rng(24);
  const SphereQuadGrid g = build_quad_grid(60, 120);
  for (int c = 0; c < 8; ++c) {
    CAPTURE(c);
    WobbleMap::Params p;
    p.amplitude = rng.uniform(0.2, 1.0);
    p.shear = rng.uniform(-0.5, 0.5);
    WobbleMap a(p);
    FoldMap b(rng.uniform(0.1, 0.5));
    double prev = 0.0, prev_norm = 0.0;
    for (double e : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      const W1pDistance d = w1p_dist(a, b, e, g);
      const double s = d.seminorm / std::pow(4 * kPi, 1.0 / e);
      const double n = d.norm / std::pow(4 * kPi, 1.0 / e);
      CHECK(s >= prev * (1 - 1e-12));
      CHECK(n >= prev_norm * (1 - 1e-12));
      prev = s;
      prev_norm = n;
    }
  }
}

TEST_CASE("property: patched differences live on the patch caps") {
  gen::Rng rng(25);
  for (int c = 0; c < 6; ++c) {
    CAPTURE(c);
    BubbleSpec b;
    b.center = rng.unit();
    b.j = rng.integer(4, 12);
    b.target = rng.unit();
    b.profile = BubbleProfile::cone;
    auto base = std::make_shared<ConstantMap>(b.target);
    const Patch patch = build_bubble(b);
    SphereMap patched(base, {patch});
    const SphereQuadGrid g = adapted_grid(patched, {60, 120});
    const double p = rng.uniform(1.0, 2.0);
    const W1pDistance whole = w1p_dist(*base, patched, p, g);
    const W1pDistance local = w1p_dist(*base, patched, p, g, Region::cap(patch.cap));
    CHECK(std::abs(std::pow(whole.norm, p) - std::pow(local.norm, p)) <= 1e-10 * std::max(1.0, std::pow(whole.norm, p)));
  }
}

TEST_CASE("diff_support_area oracles") {
  const SphereQuadGrid base_grid = build_quad_grid(90, 180);
  WobbleMap w;
  CHECK(diff_support_area(w, w, base_grid) == 0.0);
  BubbleSpec b;
  b.center = UnitVec3(0.2, -0.3, 0.9);
  b.j = 4;
  b.target = UnitVec3(0, 0, 1);
  b.profile = BubbleProfile::cone;
  auto base = std::make_shared<ConstantMap>(b.target);
  const Patch patch = build_bubble(b);
  SphereMap patched(base, {patch});
  // The cone bubble differs from the constant exactly on the open 1/j cap.
  const double rho = 1.0 / b.j;
  const double area = diff_support_area(*base, patched, adapted_grid(patched, {180, 360}));
  CHECK(area == doctest::Approx(kPi * rho * rho).epsilon(0.02));
}

TEST_CASE("degree integral oracles") {
  const SphereQuadGrid g = build_quad_grid(180, 360);
  CHECK(degree_integral(IdentityMap(), g) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(degree_integral(ConstantMap(UnitVec3(1, 0, 0)), g) == 0.0);
  CHECK(degree_integral(AntipodalMap(), g) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("regular value counting") {
  const SphereQuadGrid g = build_quad_grid(60, 120);
  gen::Rng rng(26);
  for (int c = 0; c < 20; ++c) {
    CAPTURE(c);
    const UnitVec3 y = rng.unit();
    const PreimageCount pc = count_preimages(IdentityMap(), y, g);
    CHECK(pc.degree == 1);
    REQUIRE(pc.preimages.size() == 1);
    CHECK(distance(pc.preimages[0].x.vec(), y.vec()) < 1e-9);
  }
}

TEST_CASE("property: degree integral and regular values agree on a map library") {
  gen::Rng rng(27);
  const Library lib = test_library();
  REQUIRE(lib.maps.size() == 10);
  for (std::size_t i = 0; i < lib.maps.size(); ++i) {
    CAPTURE(i);
    const auto& [m, expected] = lib.maps[i];
    const SphereQuadGrid g = adapted_grid(*m, {180, 360});
    const double raw = degree_integral(*m, g);
    CHECK(std::abs(raw - std::round(raw)) < 0.05);
    CHECK(std::lround(raw) == expected);
    int certified = 0;
    for (int t = 0; t < 4; ++t) {
      const UnitVec3 y = rng.unit();
      try {
        CHECK(degree_regular_value(*m, y, g) == expected);
        ++certified;
      } catch (const NumericalError&) {
      }
    }
    CHECK(certified >= 2);
  }
}

TEST_CASE("jacobian area of the identity is the sphere area") {
  const SphereQuadGrid g = build_quad_grid(180, 360);
  CHECK(jacobian_area(IdentityMap(), g) == doctest::Approx(4 * kPi).epsilon(1e-5));
}

TEST_CASE("map descriptors round-trip through JSON") {
  const nlohmann::ordered_json j = {{"kind", "wobble"}, {"params", {{"amplitude", 0.5}}}};
  const MapPtr m = map_from_json(j);
  const MapPtr again = map_from_json(m->describe());
  gen::Rng rng(28);
  for (int i = 0; i < 50; ++i) {
    const UnitVec3 x = rng.unit();
    CHECK(m->value(x) == again->value(x));
  }
  CHECK_THROWS_AS(map_from_json({{"kind", "no_such_map"}}), ConfigError);
  CHECK_THROWS_AS(map_from_json({{"kind", "constant"}}), ConfigError);
}

TEST_CASE("grid maps round-trip through the binary format") {
  const GridMap g = GridMap::sample(IdentityMap(), 20, 40);
  const auto dir = std::filesystem::temp_directory_path() / "bubblelab_grid_test";
  std::filesystem::create_directories(dir);
  const auto side = write_grid_map(g, dir / "ident");
  const GridMap back = read_grid_map(side);
  REQUIRE(back.samples().size() == g.samples().size());
  for (std::size_t i = 0; i < g.samples().size(); ++i) CHECK(back.samples()[i] == g.samples()[i]);
  CHECK(std::lround(degree_integral(back, build_quad_grid(90, 180))) == 1);
  std::filesystem::remove_all(dir);
}
