#pragma once

#include <optional>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/quadrature.hpp"

namespace bubblelab {

struct TangentDeriv {
  Vec3 d_phi;           // per radian of polar angle
  Vec3 d_theta_scaled;  // azimuthal derivative / sin(phi), per unit arc length

  double norm_sq() const { return bubblelab::norm_sq(d_phi) + bubblelab::norm_sq(d_theta_scaled); }
};

/// Requires h in [1e-7, 1e-3] and p at least 2h away from both poles.
TangentDeriv tangent_deriv(const MapEvaluator& m, const SphericalPoint& p, double h = kDefaultFdStep);

/// |∇_T m|² at a quadrature node, using the node's own tangent frame.
double grad_sq(const MapEvaluator& m, const QuadNode& n, double h = kDefaultFdStep);

/// Quadrature grid whose ring layouts follow the patch structure of `m`:
/// nested caps get their own graded layouts and kinks sit on ring edges.
SphereQuadGrid adapted_grid(const MapEvaluator& m, GridResolution res);

double boundary_energy(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region = std::nullopt);

struct W1pDistance {
  double norm;       // (∫ (|d|² + |∇d|²)^{p/2})^{1/p}
  double seminorm;   // (∫ |∇d|^p)^{1/p}
  double lp;         // (∫ |d|^p)^{1/p}
};

/// Distances between two maps, d = m1 − m2 taken in R³. Requires 1 <= p <= 2.
W1pDistance w1p_dist(const MapEvaluator& m1, const MapEvaluator& m2, double p, const SphereQuadGrid& grid,
                     const std::optional<Region>& region = std::nullopt);

double diff_support_area(const MapEvaluator& m1, const MapEvaluator& m2, const SphereQuadGrid& grid, double tol = 1e-9);

/// (1/4π) ∫ m · (∂₁m × ∂₂m) dσ in oriented frames.
double degree_integral(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region = std::nullopt);

/// ∫ |Jacobian| dσ: the image area counted with multiplicity.
double jacobian_area(const MapEvaluator& m, const SphereQuadGrid& grid, const std::optional<Region>& region = std::nullopt);

double max_grad_sq(const MapEvaluator& m, const SphereQuadGrid& grid);

}  // namespace bubblelab
