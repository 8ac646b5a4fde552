#pragma once

#include <array>
#include <numbers>

#include "bubblelab/vec3.hpp"

namespace bubblelab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Polar angle phi in [0, pi] (phi = pi is the south pole) and azimuth theta in [0, 2pi).
/// At either pole theta is canonically 0.
struct SphericalPoint {
  double phi = 0.0;
  double theta = 0.0;

  static SphericalPoint make(double phi, double theta);
};

/// Polar coordinates in the equatorial plane.
struct PolarPoint2 {
  double rho = 0.0;
  double theta = 0.0;

  static PolarPoint2 make(double rho, double theta);
};

double wrap_angle(double theta);

UnitVec3 to_cartesian(const SphericalPoint& p);
SphericalPoint to_spherical(const Vec3& x);

/// Unit tangent vectors e_phi, e_theta at p. e_phi x e_theta is the outward normal.
struct TangentFrame {
  Vec3 e1;
  Vec3 e2;
};
TangentFrame spherical_frame(const SphericalPoint& p);
/// Some oriented orthonormal tangent frame at x; deterministic, valid at the poles.
TangentFrame any_frame(const Vec3& x);

/// Proper rotation stored row-major.
class Rotation {
 public:
  Rotation();
  explicit Rotation(const std::array<double, 9>& m) : m_(m) {}

  Vec3 apply(const Vec3& v) const;
  UnitVec3 apply(const UnitVec3& v) const { return UnitVec3::trusted(apply(v.vec())); }
  Rotation inverse() const;
  Rotation then(const Rotation& next) const;  // next ∘ this
  double operator()(int r, int c) const { return m_[3 * r + c]; }
  const std::array<double, 9>& matrix() const { return m_; }

  static Rotation axis_angle(const Vec3& unit_axis, double angle);

 private:
  std::array<double, 9> m_;
};

/// Minimal-angle rotation taking a to b, about the axis a x b.
/// Antipodal inputs rotate by pi about the lexicographically smallest unit
/// coordinate axis orthogonal to a (projected and normalized if a is not
/// axis-aligned), so e.g. (0,0,1) -> (0,0,-1) is a half turn about x.
Rotation rotate_taking(const UnitVec3& a, const UnitVec3& b);

/// Chordal <-> geodesic radius of a cap.
double chord_to_angle(double chord);
double angle_to_chord(double angle);

/// Spherical cap D(center, r) = B(center, r) ∩ S², r measured chordally.
class SphericalCap {
 public:
  SphericalCap(const UnitVec3& center, double chordal_radius);

  const UnitVec3& center() const { return center_; }
  double chordal_radius() const { return radius_; }
  double geodesic_radius() const { return chord_to_angle(radius_); }
  double area() const { return kPi * radius_ * radius_; }
  bool contains(const Vec3& x) const { return norm_sq(x - center_.vec()) < radius_ * radius_; }
  /// True when the closed caps do not overlap in an open set.
  bool disjoint_from(const SphericalCap& other) const;
  /// True when this cap lies inside `outer`.
  bool inside(const SphericalCap& outer) const;

 private:
  UnitVec3 center_;
  double radius_;
};

/// (phi, theta) -> (cot(phi/2), theta). North pole excluded.
PolarPoint2 stereo_project(const SphericalPoint& p);
SphericalPoint stereo_inverse(const PolarPoint2& w);

struct CapComplementArea {
  double stated_value;   // pi (3 + (1 - eps/2)^2)
  double chordal_value;  // pi (4 - eps^2)
};
/// Area of S² minus a chordal eps-cap, in both the closed form used in the
/// singularity-installation argument and the standard chordal form.
CapComplementArea cap_complement_area(double eps);

}  // namespace bubblelab
