#include "bubblelab/map_functionals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "bubblelab/parallel.hpp"

namespace bubblelab {

TangentDeriv tangent_deriv(const MapEvaluator& m, const SphericalPoint& p, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw std::domain_error("tangent_deriv: step outside [1e-7, 1e-3]");
  if (p.phi < 2.0 * h || p.phi > kPi - 2.0 * h) throw std::domain_error("tangent_deriv: point too close to a pole");
  const Vec3 x = to_cartesian(p);
  const TangentFrame f = spherical_frame(p);
  return {m.derivative(x, f.e1, h), m.derivative(x, f.e2, h)};
}

double grad_sq(const MapEvaluator& m, const QuadNode& n, double h) {
  return norm_sq(m.derivative(n.x, n.t1, h)) + norm_sq(m.derivative(n.x, n.t2, h));
}

namespace {

// Per-node quantities evaluated in parallel, then reduced pairwise in node order.
template <std::size_t K, typename F>
std::array<double, K> node_sums(const SphereQuadGrid& grid, const std::optional<Region>& region, F&& f) {
  const auto& nodes = grid.nodes();
  std::vector<std::array<double, K>> vals(nodes.size());
  std::vector<char> used(nodes.size(), 0);
  parallel_chunks(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (region && !region->contains(nodes[i].x)) continue;
      used[i] = 1;
      vals[i] = f(nodes[i]);
      for (auto& v : vals[i]) v *= nodes[i].weight;
    }
  });
  std::array<double, K> out{};
  std::vector<double> col;
  col.reserve(nodes.size());
  for (std::size_t k = 0; k < K; ++k) {
    col.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (used[i]) col.push_back(vals[i][k]);
    out[k] = pairwise_sum(col);
  }
  return out;
}

struct CapNode {
  Patch patch;
  std::vector<std::size_t> children;
};

constexpr int kMinRows = 16;

/// Segments ending at or below `geo_limit` with hi/lo > 8 get geometric rows.
std::vector<double> segment_edges(std::vector<double> cuts, int rows_per_pi, double geo_limit, int graded_rows,
                                  std::vector<bool>& log_rows) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), cuts.end());
  std::vector<RingSegment> segs;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double lo = cuts[i - 1], hi = cuts[i];
    const bool geo = hi <= geo_limit && lo > 0.0 && hi / lo > 8.0;
    // Graded rows scale with the number of e-folds spanned.
    const int rows = geo ? std::max(graded_rows, static_cast<int>(std::ceil(2.0 * graded_rows * std::log(hi / lo))))
                         : std::max(kMinRows, static_cast<int>(std::ceil(rows_per_pi * (hi - lo) / kPi)));
    segs.push_back({hi, rows, geo});
  }
  log_rows.clear();
  for (const auto& s : segs) log_rows.insert(log_rows.end(), s.rows, s.geometric);
  return ring_edges(cuts.front(), segs);
}

void add_cap_layouts(const std::vector<CapNode>& caps, std::size_t idx, GridResolution res, std::vector<RingLayout>& out) {
  const CapNode& c = caps[idx];
  const double R = c.patch.cap.geodesic_radius();
  std::vector<double> cuts{0.0, R};
  for (double b : c.patch.eval->radial_breaks())
    if (b > 0.0 && b < R) cuts.push_back(b);
  RingLayout L;
  L.frame = rotate_taking(UnitVec3(kNorthPole), c.patch.cap.center());
  // Cap layouts get a quarter of the nominal rows per segment, graded pieces the full count.
  L.psi_edges = segment_edges(cuts, std::max(kMinRows, res.n_phi) * 4, c.patch.eval->multiscale() ? R : 0.0, res.n_phi, L.log_rows);
  L.n_theta = res.n_theta;
  L.domain = c.patch.cap;
  for (std::size_t ch : c.children) L.holes.push_back(caps[ch].patch.cap);
  out.push_back(std::move(L));
  for (std::size_t ch : c.children) add_cap_layouts(caps, ch, res, out);
}

}  // namespace

SphereQuadGrid adapted_grid(const MapEvaluator& m, GridResolution res) {
  const auto* sm = dynamic_cast<const SphereMap*>(&m);
  std::vector<Patch> patches = sm ? sm->all_patches() : std::vector<Patch>{};
  if (patches.empty()) return build_quad_grid(res.n_phi, res.n_theta);

  std::vector<CapNode> caps;
  for (auto& p : patches) caps.push_back({std::move(p), {}});
  // Parent = smallest cap strictly containing this one.
  std::vector<std::size_t> top;
  for (std::size_t a = 0; a < caps.size(); ++a) {
    std::optional<std::size_t> parent;
    for (std::size_t b = 0; b < caps.size(); ++b) {
      if (a == b || !caps[a].patch.cap.inside(caps[b].patch.cap)) continue;
      if (!parent || caps[b].patch.cap.chordal_radius() < caps[*parent].patch.cap.chordal_radius()) parent = b;
    }
    if (parent) caps[*parent].children.push_back(a);
    else top.push_back(a);
  }

  UnitVec3 axis(kNorthPole);
  std::vector<std::size_t> on_axis;
  if (top.size() == 2 && !caps[top[0]].patch.eval->multiscale() && caps[top[1]].patch.eval->multiscale()) std::swap(top[0], top[1]);
  if (top.size() == 1 || (top.size() == 2 && angle_between(caps[top[0]].patch.cap.center(), caps[top[1]].patch.cap.center()) > kPi - 1e-12)) {
    axis = caps[top[0]].patch.cap.center();
    on_axis = {top[0]};
    // Geometric grading runs toward the axis only, so a multiscale south cap gets its own layout.
    if (top.size() == 2 && !caps[top[1]].patch.eval->multiscale()) on_axis.push_back(top[1]);
  }
  double geo_limit = 0.0;
  if (!on_axis.empty() && caps[on_axis[0]].patch.eval->multiscale()) geo_limit = caps[on_axis[0]].patch.cap.geodesic_radius();

  RingLayout root;
  root.frame = rotate_taking(UnitVec3(kNorthPole), axis);
  std::vector<double> cuts{0.0, kPi};
  std::vector<std::size_t> holes;
  for (std::size_t t : top) {
    if (std::find(on_axis.begin(), on_axis.end(), t) == on_axis.end()) {
      holes.push_back(t);
      continue;
    }
    const bool north = dot(caps[t].patch.cap.center(), axis) > 0.0;
    std::vector<double> b = caps[t].patch.eval->radial_breaks();
    b.push_back(caps[t].patch.cap.geodesic_radius());
    for (double v : b)
      if (v > 0.0 && v < kPi) cuts.push_back(north ? v : kPi - v);
    for (std::size_t ch : caps[t].children) holes.push_back(ch);
  }
  std::vector<bool> log_rows;
  root.psi_edges = segment_edges(cuts, res.n_phi, geo_limit, res.n_phi, log_rows);
  root.log_rows = log_rows;
  root.n_theta = res.n_theta;
  for (std::size_t h : holes) root.holes.push_back(caps[h].patch.cap);

  std::vector<RingLayout> layouts{std::move(root)};
  for (std::size_t h : holes) add_cap_layouts(caps, h, res, layouts);
  return SphereQuadGrid(std::move(layouts), res);
}

double boundary_energy(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region) {
  return node_sums<1>(grid, region, [&](const QuadNode& n) { return std::array<double, 1>{grad_sq(m, n)}; })[0];
}

W1pDistance w1p_dist(const MapEvaluator& m1, const MapEvaluator& m2, double p, const SphereQuadGrid& grid,
                     const std::optional<Region>& region) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::domain_error("w1p_dist: p outside [1, 2]");
  const auto s = node_sums<3>(grid, region, [&](const QuadNode& n) {
    const double d2 = norm_sq(m1.value(n.x) - m2.value(n.x));
    const double g2 = norm_sq(m1.derivative(n.x, n.t1, kDefaultFdStep) - m2.derivative(n.x, n.t1, kDefaultFdStep)) +
                      norm_sq(m1.derivative(n.x, n.t2, kDefaultFdStep) - m2.derivative(n.x, n.t2, kDefaultFdStep));
    return std::array<double, 3>{std::pow(d2 + g2, 0.5 * p), std::pow(g2, 0.5 * p), std::pow(d2, 0.5 * p)};
  });
  return {std::pow(s[0], 1.0 / p), std::pow(s[1], 1.0 / p), std::pow(s[2], 1.0 / p)};
}

double diff_support_area(const MapEvaluator& m1, const MapEvaluator& m2, const SphereQuadGrid& grid, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("diff_support_area: tolerance must be positive");
  return node_sums<1>(grid, std::nullopt, [&](const QuadNode& n) {
    return std::array<double, 1>{distance(m1.value(n.x), m2.value(n.x)) > tol ? 1.0 : 0.0};
  })[0];
}

namespace {
double jacobian(const MapEvaluator& m, const QuadNode& n) {
  const Vec3 a = m.derivative(n.x, n.t1, kDefaultFdStep);
  const Vec3 b = m.derivative(n.x, n.t2, kDefaultFdStep);
  return triple(m.value(n.x), a, b);
}
}  // namespace

double degree_integral(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region) {
  return node_sums<1>(grid, region, [&](const QuadNode& n) { return std::array<double, 1>{jacobian(m, n)}; })[0] / (4.0 * kPi);
}

double jacobian_area(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region) {
  return node_sums<1>(grid, region, [&](const QuadNode& n) { return std::array<double, 1>{std::abs(jacobian(m, n))}; })[0];
}

double max_grad_sq(const MapEvaluator& m, const SphereQuadGrid& grid) {
  double best = 0.0;
  for (const auto& n : grid.nodes()) best = std::max(best, grad_sq(m, n));
  return best;
}

}  // namespace bubblelab
