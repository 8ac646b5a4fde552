#pragma once

#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/quadrature.hpp"

namespace bubblelab {

struct Preimage {
  UnitVec3 x;
  int sign;    // orientation of the differential at x
  double det;  // Jacobian determinant in oriented frames
};

struct PreimageCount {
  int degree = 0;
  std::vector<Preimage> preimages;
  bool escalated = false;  // the grid had to be refined once
};

/// Signed preimage count of y. Candidate cells come from the spherical
/// triangle images of each ring layout; each candidate is refined by damped
/// Newton in a tangent chart. Throws NumericalError when y is not certified as
/// a regular value after one refinement of the grid.
PreimageCount count_preimages(const MapEvaluator& m, const UnitVec3& y, const SphereQuadGrid& grid);

inline int degree_regular_value(const MapEvaluator& m, const UnitVec3& y, const SphereQuadGrid& grid) {
  return count_preimages(m, y, grid).degree;
}

}  // namespace bubblelab
