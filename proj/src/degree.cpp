#include "bubblelab/degree.hpp"

#include <cmath>
#include <algorithm>
#include <optional>

#include "bubblelab/errors.hpp"

namespace bubblelab {

namespace {

constexpr int kNewtonIters = 20;
constexpr double kResidualTol = 1e-11;
constexpr double kMinDet = 1e-6;
constexpr double kDedupe = 1e-9;

struct Tri {
  Vec3 p[3];
  Vec3 img[3];
};

bool image_contains(const Tri& t, const Vec3& y) {
  const double s1 = triple(t.img[0], t.img[1], y);
  const double s2 = triple(t.img[1], t.img[2], y);
  const double s3 = triple(t.img[2], t.img[0], y);
  // Collapsed image triangles carry only rounding noise in their signs.
  const double o = triple(t.img[0], t.img[1], t.img[2]);
  if (std::abs(o) < 1e-13) return false;
  const double sg = o > 0.0 ? 1.0 : -1.0;
  return sg * s1 >= -1e-15 && sg * s2 >= -1e-15 && sg * s3 >= -1e-15 && dot(y, t.img[0] + t.img[1] + t.img[2]) > 0.0;
}

Vec3 start_point(const Tri& t, const Vec3& y) {
  double w[3] = {std::abs(triple(t.img[1], t.img[2], y)), std::abs(triple(t.img[2], t.img[0], y)),
                 std::abs(triple(t.img[0], t.img[1], y))};
  const double s = w[0] + w[1] + w[2];
  if (!(s > 0.0)) return normalize(t.p[0] + t.p[1] + t.p[2]);
  return normalize((w[0] * t.p[0] + w[1] * t.p[1] + w[2] * t.p[2]) / s);
}

struct NewtonResult {
  bool converged = false;
  Vec3 x;
  double det = 0.0;
};

NewtonResult newton(const MapEvaluator& m, Vec3 x, const Vec3& y) {
  double res = norm(y - m.value(x));
  for (int it = 0; it < kNewtonIters && res >= kResidualTol; ++it) {
    const Vec3 mx = m.value(x);
    const TangentFrame tf = any_frame(x);
    const TangentFrame ff = any_frame(mx);
    const Vec3 a = m.derivative(x, tf.e1, 1e-6);
    const Vec3 b = m.derivative(x, tf.e2, 1e-6);
    const double j11 = dot(ff.e1, a), j12 = dot(ff.e1, b), j21 = dot(ff.e2, a), j22 = dot(ff.e2, b);
    const double det = j11 * j22 - j12 * j21;
    if (!(std::abs(det) > 1e-14)) break;
    const Vec3 r = y - mx;
    const double r1 = dot(ff.e1, r), r2 = dot(ff.e2, r);
    Vec3 step = ((j22 * r1 - j12 * r2) / det) * tf.e1 + ((j11 * r2 - j21 * r1) / det) * tf.e2;
    const double len = norm(step);
    if (len > 0.5) step = step * (0.5 / len);
    double lam = 1.0;
    bool moved = false;
    for (int k = 0; k < 12; ++k, lam *= 0.5) {
      const Vec3 xn = normalize(x + lam * step);
      const double rn = norm(y - m.value(xn));
      if (rn < res) {
        x = xn;
        res = rn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  NewtonResult out;
  out.x = x;
  const TangentFrame tf = any_frame(x);
  out.det = triple(m.value(x), m.derivative(x, tf.e1, 1e-6), m.derivative(x, tf.e2, 1e-6));
  // Tolerance on the preimage position: strongly stretching maps cannot
  // reach an absolute image residual of kResidualTol in double precision.
  out.converged = res < kResidualTol * std::max(1.0, std::sqrt(std::abs(out.det)));
  return out;
}

template <typename F>
void for_each_triangle(const MapEvaluator& m, const RingLayout& L, F&& f) {
  const std::size_t rings = L.psi_edges.size() - 1;
  const int nt = L.n_theta;
  const double dth = kTwoPi / nt;
  std::vector<Vec3> pts((rings + 1) * nt), img((rings + 1) * nt);
  for (std::size_t i = 0; i <= rings; ++i)
    for (int k = 0; k < nt; ++k) {
      pts[i * nt + k] = L.point(L.psi_edges[i], k * dth);
      img[i * nt + k] = m.value(pts[i * nt + k]);
    }
  auto vid = [&](std::size_t i, int k) { return i * nt + (k % nt); };
  for (std::size_t i = 0; i < rings; ++i) {
    const double lo = L.psi_edges[i], hi = L.psi_edges[i + 1];
    for (int k = 0; k < nt; ++k) {
      const std::size_t a = vid(i, k), b = vid(i, k + 1), c = vid(i + 1, k + 1), d = vid(i + 1, k);
      // Cells straddling a hole or domain edge are kept so the union covers the sphere.
      if (!L.keeps(pts[a]) && !L.keeps(pts[b]) && !L.keeps(pts[c]) && !L.keeps(pts[d]) &&
          !L.keeps(L.point(0.5 * (lo + hi), (k + 0.5) * dth)))
        continue;
      if (lo > 0.0) f(Tri{{pts[a], pts[b], pts[c]}, {img[a], img[b], img[c]}});
      if (hi < kPi) f(Tri{{pts[a], pts[c], pts[d]}, {img[a], img[c], img[d]}});
    }
  }
}

std::optional<PreimageCount> attempt(const MapEvaluator& m, const Vec3& y, const SphereQuadGrid& grid) {
  PreimageCount out;
  bool ok = true;
  for (const RingLayout& L : grid.layouts()) {
    for_each_triangle(m, L, [&](const Tri& t) {
      if (!ok || !image_contains(t, y)) return;
      NewtonResult r = newton(m, start_point(t, y), y);
      // Maps that are locally constant stall Newton; retry from the corners.
      const Vec3 alt[4] = {normalize(t.p[0] + t.p[1] + t.p[2]), t.p[0], t.p[1], t.p[2]};
      for (int a = 0; a < 4 && !(r.converged && std::abs(r.det) > kMinDet); ++a) r = newton(m, alt[a], y);
      if (!r.converged || std::abs(r.det) <= kMinDet) {
        ok = false;
        return;
      }
      for (const auto& p : out.preimages)
        if (distance(p.x, r.x) < kDedupe) return;
      out.preimages.push_back({UnitVec3(r.x), r.det > 0.0 ? 1 : -1, r.det});
      out.degree += r.det > 0.0 ? 1 : -1;
    });
    if (!ok) return std::nullopt;
  }
  return out;
}

}  // namespace

PreimageCount count_preimages(const MapEvaluator& m, const UnitVec3& y, const SphereQuadGrid& grid) {
  if (auto r = attempt(m, y, grid)) return *r;
  if (auto r = attempt(m, y, grid.refined(2))) {
    r->escalated = true;
    return *r;
  }
  throw NumericalError("degree_regular_value: target is not a certified regular value (perturb y)");
}

}  // namespace bubblelab
