#pragma once

#include <vector>

#include "bubblelab/boundary_map.hpp"
#include "bubblelab/estimates.hpp"
#include "bubblelab/quadrature.hpp"
#include "json.hpp"

namespace bubblelab {

struct AntipodalPair {
  UnitVec3 q;
  double mismatch = 0.0;  // |m(q) − m(−q)|
};

inline constexpr double kAntipodalTol = 1e-6;

/// Requires round(degree_integral(m)) = 0, then runs search_antipodal_pair.
AntipodalPair find_antipodal_pair(const MapEvaluator& m, const SphereQuadGrid& grid);

/// Grid scan of g(x) = |m(x) − m(−x)| (ties: largest z) followed by
/// Levenberg-Marquardt on m(x) − m(−x). Escalates the grid once, then throws
/// NumericalError.
AntipodalPair search_antipodal_pair(const MapEvaluator& m, const SphereQuadGrid& grid);

struct DeltaChoice {
  double delta = 0.0;
  double max_grad_sq = 0.0;
  int halvings = 0;
  double image_area_bound = 0.0;  // bound on the area of m(B(q,2δ)) ∪ m(B(−q,2δ))
};

/// 0.9 · ε / (4 √(16π (max|∇_T m|² + 1))), halved until the 2δ caps are
/// disjoint and their image-area bound is below 4π.
DeltaChoice select_delta(const MapEvaluator& m, const UnitVec3& q, double eps, GridResolution res = {180, 360});

struct Phi1Spec {
  UnitVec3 q;
  double delta = 0.0;  // chordal
  MapPtr base;
};

/// Inside the chordal δ-cap: the constant m(center). Between δ and 2δ: m at
/// the point whose geodesic distance to the center is stretched affinely from
/// [T₁, T₂] to [0, T₂] (T₁, T₂ the geodesic radii of the δ and 2δ caps).
class SquashCapEvaluator final : public MapEvaluator {
 public:
  SquashCapEvaluator(const UnitVec3& center, double delta, MapPtr base);
  Vec3 value(const Vec3& x) const override;
  Vec3 derivative(const Vec3& x, const Vec3& v, double h) const override;
  std::vector<double> radial_breaks() const override { return {t1_, t2_}; }
  nlohmann::ordered_json describe() const override;

 private:
  UnitVec3 center_;
  double delta_, t1_, t2_;
  MapPtr base_;
  Vec3 constant_;
};

SphereMap build_phi1(const Phi1Spec& spec);

enum class BubbleProfile {
  stereographic,  // exact three-piece formula
  cone,           // polar angle π (1 − ψ/ψ₁) on the 1/j cap; resolvable on coarse lattices
};

struct BubbleSpec {
  UnitVec3 center;
  int j = 2;
  UnitVec3 target;
  int orientation = 1;
  bool mirror = false;  // evaluate at −x (the cap then sits at −center)
  BubbleProfile profile = BubbleProfile::stereographic;
  double amplitude = 1.0;  // polar angle scaled by this factor; 1 is the bubble itself

  BubbleConstants constants() const { return bubble_constants(j); }
  UnitVec3 cap_center() const { return mirror ? -center : center; }
  double cap_radius() const { return 2.0 / j; }
};

class BubbleEvaluator final : public MapEvaluator {
 public:
  explicit BubbleEvaluator(const BubbleSpec& spec);
  Vec3 value(const Vec3& x) const override;
  Vec3 derivative(const Vec3& x, const Vec3& v, double h) const override;
  std::vector<double> radial_breaks() const override;
  bool multiscale() const override { return spec_.profile == BubbleProfile::stereographic; }
  nlohmann::ordered_json describe() const override;
  const BubbleSpec& spec() const { return spec_; }
  /// Target polar angle F and dF/dψ at geodesic distance ψ from the center.
  std::pair<double, double> profile(double psi) const;

 private:
  BubbleSpec spec_;
  BubbleConstants c_;
  double psi_outer_;  // geodesic radius of the 1/j cap
  Vec3 e1_, e2_, f1_, f2_;
};

/// Cap-local patch of chordal radius 2/j. When `base` is given it must be
/// constant (= target, within 1e-9) on the patch cap.
Patch build_bubble(const BubbleSpec& spec, const MapEvaluator* base = nullptr);

struct Phi2Spec {
  Phi1Spec phi1;
  int N = 1;
  int j = 2;
  double alpha = 0.0;
  std::vector<UnitVec3> xis;
  BubbleProfile profile = BubbleProfile::stereographic;
  double amplitude = 1.0;  // passed to every bubble; values below 1 give the homotopy φ₁ ~ φ₂

  /// Fills alpha and the points ξ_i from phi1, N and j.
  static Phi2Spec make(const Phi1Spec& phi1, int N, int j, BubbleProfile profile = BubbleProfile::stereographic);
  /// Throws std::invalid_argument when the caps violate 2/j < δ/(4N),
  /// containment in B(±q, δ) or pairwise disjointness.
  void validate() const;
};

SphereMap build_phi2(const Phi2Spec& spec);

/// Plan descriptor: {base_map, q, delta, N, j, alpha, xis[], orientations[], profile}.
nlohmann::ordered_json plan_to_json(const Phi2Spec& spec);
Phi2Spec plan_from_json(const nlohmann::ordered_json& j);

/// Smallest j with 2/j < δ/(4N), optionally also requiring 2/j >= min_chord.
int smallest_admissible_j(double delta, int N);

}  // namespace bubblelab
