#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/vec3.hpp"

namespace bubblelab {

enum class NodeKind : std::uint8_t { outside = 0, interior = 1, boundary = 2 };

/// A run of interior nodes along x: indices [first, last] of row (j, k).
struct InteriorSpan {
  int j, k;
  int i0, i1;  // inclusive
};

/// Cubic lattice of spacing h covering the closed ball of radius 1 + h/2.
/// Node (i, j, k) sits at ((i − n/2 + 1/2) h, ...), so no node is at the
/// origin. Interior: |x| < 1 − h/2; boundary: 1 − h/2 <= |x| <= 1 + h/2.
class BallLattice {
 public:
  static std::shared_ptr<const BallLattice> build(double h);

  double h() const { return h_; }
  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  /// Storage length including zero padding past the last plane.
  std::size_t padded_size() const { return size() + static_cast<std::size_t>(n_) * n_ + 8; }
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(k) * n_ + j) * n_ + i; }
  double coord(int i) const { return (i - n_ / 2 + 0.5) * h_; }
  Vec3 position(std::size_t idx) const;
  NodeKind kind(std::size_t idx) const { return static_cast<NodeKind>(kind_[idx]); }

  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  /// Radial projections x/|x| of the boundary nodes, aligned with boundary_nodes().
  const std::vector<UnitVec3>& boundary_projection() const { return projection_; }
  const std::vector<InteriorSpan>& spans() const { return spans_; }
  /// spans()[plane_span_begin()[k] .. plane_span_begin()[k+1]) lie in plane k.
  const std::vector<std::size_t>& plane_span_begin() const { return plane_span_begin_; }
  /// 1.0 for interior or boundary nodes, 0.0 elsewhere (padded).
  const std::vector<double>& active_mask() const { return act_; }
  /// 1.0 for interior nodes, 0.0 elsewhere (padded).
  const std::vector<double>& interior_mask() const { return inter_; }
  /// Six neighbours in the order −x, +x, −y, +y, −z, +z.
  std::array<std::size_t, 6> neighbors(std::size_t idx) const;

 private:
  double h_ = 0.0;
  int n_ = 0;
  std::vector<std::uint8_t> kind_;
  std::vector<std::size_t> interior_, boundary_;
  std::vector<UnitVec3> projection_;
  std::vector<InteriorSpan> spans_;
  std::vector<std::size_t> plane_span_begin_;
  std::vector<double> act_, inter_;
};

/// Unit vectors on a lattice, stored as three component arrays. Outside
/// nodes hold zeros. Boundary nodes carry the frozen trace.
class BallField {
 public:
  explicit BallField(std::shared_ptr<const BallLattice> lat);

  const BallLattice& lattice() const { return *lat_; }
  const std::shared_ptr<const BallLattice>& lattice_ptr() const { return lat_; }
  Vec3 at(std::size_t idx) const { return {ux[idx], uy[idx], uz[idx]}; }
  void set(std::size_t idx, const Vec3& v) {
    ux[idx] = v.x;
    uy[idx] = v.y;
    uz[idx] = v.z;
  }
  bool operator==(const BallField& o) const { return ux == o.ux && uy == o.uy && uz == o.uz; }

  std::vector<double> ux, uy, uz;

 private:
  std::shared_ptr<const BallLattice> lat_;
};

/// Boundary node b gets m(b/|b|).
void sample_boundary(const MapEvaluator& m, BallField& u);
/// Interior node x gets m(x/|x|) (value of the boundary ray through x).
void radial_fill(const MapEvaluator& m, BallField& u);
/// Interior nodes get independent uniform random unit vectors.
void random_fill(std::uint64_t seed, BallField& u);

/// Σ over links with both ends active and at least one interior end of
/// |u_a − u_b|² h. Reduction order is fixed, so the value does not depend on
/// the kernel variant or the thread count.
double dirichlet_energy(const BallField& u, int threads = 0);

}  // namespace bubblelab
