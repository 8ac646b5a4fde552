#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bubblelab/sphere.hpp"

namespace bubblelab {

/// Sum with pairwise (cascade) association. The result depends only on the
/// input order, never on how work was scheduled.
double pairwise_sum(std::span<const double> values);

struct GridResolution {
  int n_phi = 180;
  int n_theta = 360;

  static GridResolution parse(const std::string& text);  // "360x720"
};

struct QuadNode {
  UnitVec3 x;
  Vec3 t1;  // oriented tangent frame: t1 x t2 = x
  Vec3 t2;
  double weight = 0.0;  // steradians
  SphericalPoint sp;
};

/// Rings of cells around `axis`: rings bounded by the polar angles in
/// `psi_edges` (measured from the axis), each split into n_theta equal
/// azimuthal sectors. Nodes sit at cell midpoints; weights are exact cell areas.
struct RingLayout {
  Rotation frame;  // takes the +z axis to the layout axis
  std::vector<double> psi_edges;
  std::vector<bool> log_rows;  // per ring: node at geometric instead of arithmetic midpoint
  int n_theta = 0;
  std::optional<SphericalCap> domain;  // nodes outside are dropped
  std::vector<SphericalCap> holes;     // nodes inside are dropped

  bool keeps(const Vec3& x) const;
  Vec3 point(double psi, double theta) const;
};

/// Radial segment description used to build graded ring layouts.
struct RingSegment {
  double psi_end;
  int rows;
  bool geometric = false;  // geometric spacing (requires a positive start)
};

std::vector<double> ring_edges(double psi_start, std::span<const RingSegment> segments);

class SphereQuadGrid {
 public:
  SphereQuadGrid() = default;
  SphereQuadGrid(std::vector<RingLayout> layouts, GridResolution nominal);

  const std::vector<QuadNode>& nodes() const { return nodes_; }
  const std::vector<RingLayout>& layouts() const { return layouts_; }
  GridResolution resolution() const { return resolution_; }
  std::size_t size() const { return nodes_.size(); }
  double total_weight() const;
  double min_weight() const;

  /// Same layouts with rings and sectors subdivided `factor` times.
  SphereQuadGrid refined(int factor) const;

 private:
  std::vector<RingLayout> layouts_;
  std::vector<QuadNode> nodes_;
  GridResolution resolution_;
};

/// Midpoint latitude-longitude grid: nodes at phi = (k+1/2)Δphi, theta = (l+1/2)Δtheta.
SphereQuadGrid build_quad_grid(int n_phi, int n_theta);

/// Full-sphere ring grid around `axis` with prescribed ring edges from 0 to pi.
SphereQuadGrid build_polar_grid(const UnitVec3& axis, std::vector<double> psi_edges, std::vector<bool> log_rows,
                                int n_theta, GridResolution nominal);

/// Integration region: union of caps, or its complement.
struct Region {
  std::vector<SphericalCap> caps;
  bool complement = false;

  bool contains(const Vec3& x) const;
  static Region cap(const SphericalCap& c) { return Region{{c}, false}; }
};

/// Σ w f(node) over the nodes inside `region` (all nodes if absent).
template <typename F>
double integrate(const SphereQuadGrid& grid, F&& f, const std::optional<Region>& region = std::nullopt) {
  std::vector<double> terms;
  terms.reserve(grid.size());
  for (const QuadNode& n : grid.nodes()) {
    if (region && !region->contains(n.x)) continue;
    terms.push_back(n.weight * f(n));
  }
  return pairwise_sum(terms);
}

}  // namespace bubblelab
