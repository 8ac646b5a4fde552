#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace bubblelab {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double norm_sq(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm_sq(a)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
/// Scalar triple product a · (b × c).
constexpr double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

/// A point of the unit sphere. Construction renormalizes, so the invariant
/// |v| = 1 holds to rounding for every instance.
class UnitVec3 {
 public:
  UnitVec3() : v_{0.0, 0.0, 1.0} {}
  explicit UnitVec3(const Vec3& v) : v_(normalized(v)) {}
  UnitVec3(double x, double y, double z) : UnitVec3(Vec3{x, y, z}) {}

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

  UnitVec3 operator-() const {
    UnitVec3 r;
    r.v_ = -v_;
    return r;
  }
  friend bool operator==(const UnitVec3& a, const UnitVec3& b) { return a.v_ == b.v_; }

  /// Wraps an already-unit vector without renormalizing. Callers guarantee |v| = 1.
  static UnitVec3 trusted(const Vec3& v) {
    UnitVec3 r;
    r.v_ = v;
    return r;
  }

 private:
  static Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("UnitVec3: cannot normalize zero or non-finite vector");
    return v / n;
  }
  Vec3 v_;
};

inline Vec3 normalize(const Vec3& v) { return UnitVec3(v).vec(); }

inline constexpr Vec3 kNorthPole{0.0, 0.0, 1.0};
inline constexpr Vec3 kSouthPole{0.0, 0.0, -1.0};

/// Angle between two unit vectors, accurate for nearly parallel and nearly antipodal pairs.
inline double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

}  // namespace bubblelab
