#include "bubblelab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubblelab {

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

SphericalPoint SphericalPoint::make(double phi, double theta) {
  if (!(phi >= 0.0 && phi <= kPi)) throw std::domain_error("SphericalPoint: phi outside [0, pi]");
  if (phi == 0.0 || phi == kPi) return {phi, 0.0};
  return {phi, wrap_angle(theta)};
}

PolarPoint2 PolarPoint2::make(double rho, double theta) {
  if (!(rho >= 0.0)) throw std::domain_error("PolarPoint2: negative rho");
  return {rho, wrap_angle(theta)};
}

UnitVec3 to_cartesian(const SphericalPoint& p) {
  const double s = std::sin(p.phi);
  return UnitVec3(s * std::cos(p.theta), s * std::sin(p.theta), std::cos(p.phi));
}

SphericalPoint to_spherical(const Vec3& x) {
  const double rxy = std::hypot(x.x, x.y);
  const double phi = std::atan2(rxy, x.z);
  if (rxy == 0.0) return {phi, 0.0};
  return {phi, wrap_angle(std::atan2(x.y, x.x))};
}

TangentFrame spherical_frame(const SphericalPoint& p) {
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  return {Vec3{cp * ct, cp * st, -sp}, Vec3{-st, ct, 0.0}};
}

TangentFrame any_frame(const Vec3& x) {
  // Coordinate axis least aligned with x, Gram-Schmidt, then complete.
  const double ax = std::abs(x.x), ay = std::abs(x.y), az = std::abs(x.z);
  Vec3 e{1.0, 0.0, 0.0};
  if (ay < ax && ay <= az) e = {0.0, 1.0, 0.0};
  else if (az < ax && az < ay) e = {0.0, 0.0, 1.0};
  const Vec3 t1 = normalize(e - dot(e, x) * x);
  return {t1, cross(x, t1)};
}

Rotation::Rotation() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Vec3 Rotation::apply(const Vec3& v) const {
  return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
          m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
}

Rotation Rotation::inverse() const {
  return Rotation({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
}

Rotation Rotation::then(const Rotation& next) const {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += next(i, k) * (*this)(k, j);
      r[3 * i + j] = s;
    }
  return Rotation(r);
}

Rotation Rotation::axis_angle(const Vec3& n, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return Rotation({t * n.x * n.x + c, t * n.x * n.y - s * n.z, t * n.x * n.z + s * n.y,
                   t * n.x * n.y + s * n.z, t * n.y * n.y + c, t * n.y * n.z - s * n.x,
                   t * n.x * n.z - s * n.y, t * n.y * n.z + s * n.x, t * n.z * n.z + c});
}

Rotation rotate_taking(const UnitVec3& a, const UnitVec3& b) {
  const Vec3& u = a.vec();
  const Vec3& v = b.vec();
  if (u == v) return Rotation();
  const Vec3 axis = cross(u, v);
  const double s = norm(axis);
  const double c = dot(u, v);
  if (s == 0.0 && c < 0.0) {
    // Antipodal: first coordinate axis (x, y, z order) of least |component|.
    const std::array<double, 3> mag{std::abs(u.x), std::abs(u.y), std::abs(u.z)};
    const int k = static_cast<int>(std::min_element(mag.begin(), mag.end()) - mag.begin());
    Vec3 e{k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0, k == 2 ? 1.0 : 0.0};
    return Rotation::axis_angle(normalize(e - dot(e, u) * u), kPi);
  }
  return Rotation::axis_angle(axis / s, std::atan2(s, c));
}

double chord_to_angle(double chord) { return 2.0 * std::asin(std::clamp(chord / 2.0, 0.0, 1.0)); }
double angle_to_chord(double angle) { return 2.0 * std::sin(angle / 2.0); }

SphericalCap::SphericalCap(const UnitVec3& center, double chordal_radius) : center_(center), radius_(chordal_radius) {
  if (!(chordal_radius > 0.0 && chordal_radius <= 2.0)) throw std::domain_error("SphericalCap: chordal radius outside (0, 2]");
}

bool SphericalCap::disjoint_from(const SphericalCap& other) const {
  return angle_between(center_, other.center_) >= geodesic_radius() + other.geodesic_radius();
}

bool SphericalCap::inside(const SphericalCap& outer) const {
  return angle_between(center_, outer.center_) + geodesic_radius() <= outer.geodesic_radius();
}

PolarPoint2 stereo_project(const SphericalPoint& p) {
  if (!(p.phi > 0.0)) throw std::domain_error("stereo_project: north pole has no image");
  return PolarPoint2::make(1.0 / std::tan(p.phi / 2.0), p.theta);
}

SphericalPoint stereo_inverse(const PolarPoint2& w) {
  // phi = 2 arccot(rho) = pi - 2 atan(rho)
  return SphericalPoint::make(kPi - 2.0 * std::atan(w.rho), w.theta);
}

CapComplementArea cap_complement_area(double eps) {
  if (!(eps > 0.0 && eps <= 2.0)) throw std::domain_error("cap_complement_area: eps outside (0, 2]");
  const double t = 1.0 - eps / 2.0;
  return {kPi * (3.0 + t * t), kPi * (4.0 - eps * eps)};
}

}  // namespace bubblelab
