#include "bubblelab/estimates.hpp"

#include <cmath>
#include <stdexcept>

#include "bubblelab/sphere.hpp"

namespace bubblelab {

BubbleConstants bubble_constants(int j) {
  if (j < 1) throw std::domain_error("bubble_constants: j must be >= 1");
  BubbleConstants c;
  c.j = j;
  const double jj = static_cast<double>(j);
  c.d = 1.0 / std::sqrt(4.0 * jj * jj - 1.0);
  c.beta = 0.5 * c.d;
  const double t = std::tan(0.5 * c.beta);
  c.R = 1.0 / t;
  c.lambda = c.R / c.beta;
  c.r = c.beta * t * t;
  return c;
}

namespace {

void check_p(double p, const char* who) {
  if (!(p >= 1.0 && p < 2.0)) throw std::domain_error(std::string(who) + ": p must lie in [1, 2)");
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  // Start from 16 panels so narrow peaks are not missed by the first estimate.
  constexpr int kPanels = 16;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + (b - a) * k / kPanels, hi = a + (b - a) * (k + 1) / kPanels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    total += simpson_step(f, lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb), tol / kPanels, 48);
  }
  return total;
}

double i1_bound(double p, int j, I1Variant variant) {
  check_p(p, "i1_bound");
  const BubbleConstants c = bubble_constants(j);
  auto X = [&](double t) {
    return variant == I1Variant::a ? t * t / (t * t + 1.0) : t / std::sqrt(t * t + 1.0);
  };
  const double pref = 4.0 / (2.0 - p) * std::pow(c.R, p) / std::pow(c.R * c.R - c.beta * c.beta, 0.5 * p);
  return pref * (std::pow(X(c.beta), 2.0 - p) - std::pow(X(c.r), 2.0 - p));
}

double i1_quadrature(double p, int j) {
  check_p(p, "i1_quadrature");
  const BubbleConstants c = bubble_constants(j);
  const double R = c.R, b = c.beta;
  // t = cos(φ/2) turns sin φ dφ into 4t dt; then t = e^s resolves the peak near t ~ β/R.
  const double lo = std::log(c.r / std::sqrt(c.r * c.r + 1.0));
  const double hi = std::log(b / std::sqrt(b * b + 1.0));
  auto f = [&](double s) {
    const double t = std::exp(s);
    return std::pow(R * b / (b * b + (R * R - b * b) * t * t), p) * 4.0 * t * t;
  };
  return adaptive_simpson(f, lo, hi, 1e-10);
}

double i2_quadrature(double p, int j) {
  check_p(p, "i2_quadrature");
  const BubbleConstants c = bubble_constants(j);
  // ψ = π − φ runs over [2 atan r, 2 atan β]; ψ = e^s.
  const double lo = std::log(2.0 * std::atan(c.r)), hi = std::log(2.0 * std::atan(c.beta));
  auto f = [&](double s) {
    const double psi = std::exp(s);
    return std::pow(std::sin(psi), 1.0 - p) * psi;
  };
  return adaptive_simpson(f, lo, hi, 1e-10);
}

double phi1_h1_bound(double max_grad_sq, double delta) {
  if (!(max_grad_sq >= 0.0) || !(delta > 0.0)) throw std::domain_error("phi1_h1_bound: inputs must be positive");
  return std::sqrt(2.0 * 16.0 * kPi * delta * delta * (max_grad_sq + 1.0));
}

BubbleSeminormBound bubble_seminorm_bound(double p, int j) {
  check_p(p, "bubble_seminorm_bound");
  const BubbleConstants c = bubble_constants(j);
  const double jj = static_cast<double>(j);
  BubbleSeminormBound out;
  const double disc_area = 4.0 * kPi * c.r * c.r / (1.0 + c.r * c.r);
  out.disc = std::pow(c.beta / c.r, p) * std::pow(2.0 * kPi * c.d * c.d, 0.5 * p) * std::pow(disc_area, 0.5 * (2.0 - p));
  out.conformal = 2.0 * kPi * (i1_quadrature(p, j) + i2_quadrature(p, j));
  const double outer_area = kPi * (1.0 / (jj * jj) - 4.0 * c.beta * c.beta / (1.0 + c.beta * c.beta));
  out.outer = std::pow(2.0 * kPi * (c.d * c.d - c.beta * c.beta), 0.5 * p) * std::pow(outer_area, 0.5 * (2.0 - p));
  out.constant_annulus = 0.0;
  return out;
}

}  // namespace bubblelab
