#pragma once

#include <functional>

namespace bubblelab {

/// Closed-form constants of the stereographic bubble at scale index j.
struct BubbleConstants {
  int j = 0;
  double d = 0.0;       // (4j² − 1)^{-1/2}: stereographic radius of the 1/j cap
  double beta = 0.0;    // d / 2
  double R = 0.0;       // cot(beta / 2)
  double lambda = 0.0;  // R / beta
  double r = 0.0;       // beta tan²(beta / 2)
};

/// j >= 1 (j = 1 is accepted for testing; constructions require j >= 2).
BubbleConstants bubble_constants(int j);

enum class I1Variant { a, b };

/// (4/(2−p)) R^p/(R²−β²)^{p/2} (X(β)^{2−p} − X(r)^{2−p}), where X(t) = t²/(t²+1)
/// for variant a and t/√(t²+1) for variant b. Requires 1 <= p < 2.
double i1_bound(double p, int j, I1Variant variant);

/// ∫ (Rβ / (β² + (R²−β²) cos²(φ/2)))^p sin φ dφ over [2 arccot β, 2 arccot r].
double i1_quadrature(double p, int j);

/// ∫ sin^{1−p} φ dφ over [2 arccot β, 2 arccot r].
double i2_quadrature(double p, int j);

/// √(2 · 16π δ² (max_grad_sq + 1)).
double phi1_h1_bound(double max_grad_sq, double delta);

/// Upper bound on ∫ |∇_T(bubble − constant)|^p over the 2/j cap, summed over
/// the disc, the conformal annulus, the outer conformal annulus and the
/// constant annulus.
struct BubbleSeminormBound {
  double disc = 0.0;
  double conformal = 0.0;  // 2π (I₁ + I₂), I₁ by quadrature
  double outer = 0.0;
  double constant_annulus = 0.0;
  double total() const { return disc + conformal + outer + constant_annulus; }
};
BubbleSeminormBound bubble_seminorm_bound(double p, int j);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

}  // namespace bubblelab
