#include "bubblelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bubblelab {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

GridResolution GridResolution::parse(const std::string& text) {
  int a = 0, b = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &a, &b, &tail) != 2 || a <= 0 || b <= 0)
    throw std::invalid_argument("resolution must look like <n_phi>x<n_theta>, got '" + text + "'");
  return {a, b};
}

bool RingLayout::keeps(const Vec3& x) const {
  if (domain && !domain->contains(x)) return false;
  for (const auto& h : holes)
    if (h.contains(x)) return false;
  return true;
}

Vec3 RingLayout::point(double psi, double theta) const {
  const double s = std::sin(psi);
  return frame.apply(Vec3{s * std::cos(theta), s * std::sin(theta), std::cos(psi)});
}

std::vector<double> ring_edges(double psi_start, std::span<const RingSegment> segments) {
  std::vector<double> edges{psi_start};
  double a = psi_start;
  for (const auto& seg : segments) {
    if (!(seg.psi_end > a) || seg.rows < 1) throw std::invalid_argument("ring_edges: segments must increase");
    const bool geo = seg.geometric && a > 0.0;
    for (int k = 1; k <= seg.rows; ++k) {
      const double t = static_cast<double>(k) / seg.rows;
      edges.push_back(k == seg.rows ? seg.psi_end : (geo ? a * std::pow(seg.psi_end / a, t) : a + (seg.psi_end - a) * t));
    }
    a = seg.psi_end;
  }
  return edges;
}

namespace {

// Area of the ring psi in [lo, hi] per radian of azimuth: cos(lo) - cos(hi),
// written so it stays accurate for tiny rings.
double ring_area_per_radian(double lo, double hi) { return 2.0 * std::sin(0.5 * (hi + lo)) * std::sin(0.5 * (hi - lo)); }

void emit_layout(const RingLayout& L, std::vector<QuadNode>& out) {
  const double dtheta = kTwoPi / L.n_theta;
  const std::size_t rings = L.psi_edges.size() - 1;
  for (std::size_t i = 0; i < rings; ++i) {
    const double lo = L.psi_edges[i], hi = L.psi_edges[i + 1];
    const bool geo = i < L.log_rows.size() && L.log_rows[i] && lo > 0.0;
    const double psi = geo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const double w = ring_area_per_radian(lo, hi) * dtheta;
    const double sp = std::sin(psi), cp = std::cos(psi);
    for (int k = 0; k < L.n_theta; ++k) {
      const double th = (k + 0.5) * dtheta;
      const double st = std::sin(th), ct = std::cos(th);
      const Vec3 x = L.frame.apply(Vec3{sp * ct, sp * st, cp});
      if (!L.keeps(x)) continue;
      QuadNode n;
      n.x = UnitVec3(x);
      n.t1 = L.frame.apply(Vec3{cp * ct, cp * st, -sp});
      n.t2 = L.frame.apply(Vec3{-st, ct, 0.0});
      n.weight = w;
      n.sp = to_spherical(n.x);
      out.push_back(n);
    }
  }
}

}  // namespace

SphereQuadGrid::SphereQuadGrid(std::vector<RingLayout> layouts, GridResolution nominal)
    : layouts_(std::move(layouts)), resolution_(nominal) {
  for (const auto& L : layouts_) {
    if (L.psi_edges.size() < 2 || L.n_theta < 1) throw std::invalid_argument("SphereQuadGrid: empty layout");
    emit_layout(L, nodes_);
  }
}

double SphereQuadGrid::total_weight() const {
  std::vector<double> w;
  w.reserve(nodes_.size());
  for (const auto& n : nodes_) w.push_back(n.weight);
  return pairwise_sum(w);
}

double SphereQuadGrid::min_weight() const {
  double m = INFINITY;
  for (const auto& n : nodes_) m = std::min(m, n.weight);
  return m;
}

SphereQuadGrid SphereQuadGrid::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("refined: factor must be positive");
  std::vector<RingLayout> out;
  for (const auto& L : layouts_) {
    RingLayout R = L;
    R.psi_edges = {L.psi_edges.front()};
    R.log_rows.clear();
    for (std::size_t i = 0; i + 1 < L.psi_edges.size(); ++i) {
      const double lo = L.psi_edges[i], hi = L.psi_edges[i + 1];
      const bool geo = i < L.log_rows.size() && L.log_rows[i] && lo > 0.0;
      for (int k = 1; k <= factor; ++k) {
        const double t = static_cast<double>(k) / factor;
        R.psi_edges.push_back(k == factor ? hi : (geo ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t));
        R.log_rows.push_back(geo);
      }
    }
    R.n_theta = L.n_theta * factor;
    out.push_back(std::move(R));
  }
  return SphereQuadGrid(std::move(out), {resolution_.n_phi * factor, resolution_.n_theta * factor});
}

SphereQuadGrid build_quad_grid(int n_phi, int n_theta) {
  if (n_phi < 4 || n_theta < 8) throw std::invalid_argument("build_quad_grid: resolution too small (need n_phi >= 4, n_theta >= 8)");
  RingLayout L;
  L.n_theta = n_theta;
  L.psi_edges.resize(n_phi + 1);
  for (int i = 0; i <= n_phi; ++i) L.psi_edges[i] = kPi * i / n_phi;
  L.psi_edges.back() = kPi;
  return SphereQuadGrid({std::move(L)}, {n_phi, n_theta});
}

SphereQuadGrid build_polar_grid(const UnitVec3& axis, std::vector<double> psi_edges, std::vector<bool> log_rows,
                                int n_theta, GridResolution nominal) {
  RingLayout L;
  L.frame = rotate_taking(UnitVec3(kNorthPole), axis);
  L.psi_edges = std::move(psi_edges);
  L.log_rows = std::move(log_rows);
  L.n_theta = n_theta;
  return SphereQuadGrid({std::move(L)}, nominal);
}

bool Region::contains(const Vec3& x) const {
  bool in = false;
  for (const auto& c : caps)
    if (c.contains(x)) {
      in = true;
      break;
    }
  return in != complement;
}

}  // namespace bubblelab
