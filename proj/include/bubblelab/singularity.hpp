#pragma once

#include <optional>
#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/lattice.hpp"
#include "bubblelab/quadrature.hpp"
#include "json.hpp"

namespace bubblelab {

/// Lattice cube with minimum corner (i, j, k).
struct Cell {
  int i, j, k;
};

struct CellDegree {
  int degree = 0;
  double raw = 0.0;  // Σ solid angles / 4π
  bool resolved = true;
};

/// Signed solid angle of the spherical triangle (a, b, c), unit inputs.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c);

/// Degree of the field on the cube surface: 12 outward-oriented triangles,
/// each face split along its min-to-max corner diagonal. Unresolved when the
/// raw value is 0.2 or more away from the nearest integer.
CellDegree cell_degree(const BallField& u, const Cell& c);

struct SingularCell {
  Vec3 center;
  Cell cell;
  int degree = 0;
  double raw = 0.0;
  double local_energy = 0.0;  // Σ over the 12 cube edges of |Δu|² h
};

struct SingularityReport {
  double h = 0.0;
  std::vector<SingularCell> cells;        // cells touching interior nodes
  std::vector<SingularCell> trace_cells;  // cells made only of boundary nodes
  std::vector<Cell> unresolved;
  int total_boundary_degree = 0;  // degree on the outer surface of the scanned cells
  double boundary_raw = 0.0;
  int interior_degree_sum = 0;
  int trace_degree_sum = 0;
  std::optional<int> map_degree;  // round(degree_integral) of the boundary map, when supplied
  std::size_t scanned_cells = 0;

  /// Σ all cell degrees equals the outer-surface degree (needs all cells resolved).
  bool conserved() const;
  nlohmann::ordered_json to_json() const;
};

/// Scans every cube whose 8 corners are active.
SingularityReport detect_singularities(const BallField& u, std::optional<int> map_degree = std::nullopt);

struct FiberSample {
  double length = 0.0;
  std::size_t tets = 0;
  std::size_t skipped = 0;  // degenerate tets
  bool valid() const { return static_cast<double>(skipped) <= 1e-3 * static_cast<double>(tets); }
};

/// Length of {x : u(x)/|u(x)| = w} for the piecewise-linear interpolant on
/// the 6-tetrahedron split of every scanned cube. Throws NumericalError when
/// more than 0.1% of the candidate tetrahedra are degenerate.
double fiber_length(const BallField& u, const UnitVec3& w);
FiberSample fiber_sample(const BallField& u, const UnitVec3& w);

struct CoareaResult {
  double lhs = 0.0;  // dirichlet_energy(u)
  double rhs = 0.0;  // 2 ∫ fiber_length(w) dσ(w)
  std::size_t skipped_tets = 0;
};

/// Propagates NumericalError from an invalid fiber sample.
CoareaResult coarea_check(const BallField& u, const SphereQuadGrid& grid);

/// Indices (minimum corner) of the cubes whose 8 corners are active, in index order.
std::vector<std::size_t> scanned_cells(const BallLattice& L);

}  // namespace bubblelab
