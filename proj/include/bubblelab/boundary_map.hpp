#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bubblelab/quadrature.hpp"
#include "bubblelab/sphere.hpp"
#include "json.hpp"

namespace bubblelab {

inline constexpr double kDefaultFdStep = 1e-5;

/// A map S² -> S². value() returns a unit vector; derivative() is the
/// differential applied to a tangent vector v at x.
class MapEvaluator {
 public:
  virtual ~MapEvaluator() = default;

  virtual Vec3 value(const Vec3& x) const = 0;
  /// Default: central difference of step h along the great circle through x in direction v.
  virtual Vec3 derivative(const Vec3& x, const Vec3& v, double h) const;
  /// Geodesic radii (from the patch center) where this evaluator has kinks;
  /// used to align quadrature rings. Empty for smooth maps.
  virtual std::vector<double> radial_breaks() const { return {}; }
  /// Whether some break interval needs geometric ring spacing (scale-separated pieces).
  virtual bool multiscale() const { return false; }
  virtual nlohmann::ordered_json describe() const = 0;
};

using MapPtr = std::shared_ptr<const MapEvaluator>;

Vec3 finite_difference(const MapEvaluator& m, const Vec3& x, const Vec3& v, double h);

class ConstantMap final : public MapEvaluator {
 public:
  explicit ConstantMap(const UnitVec3& c) : c_(c) {}
  Vec3 value(const Vec3&) const override { return c_; }
  Vec3 derivative(const Vec3&, const Vec3&, double) const override { return {}; }
  nlohmann::ordered_json describe() const override;
  const UnitVec3& constant() const { return c_; }

 private:
  UnitVec3 c_;
};

class IdentityMap final : public MapEvaluator {
 public:
  Vec3 value(const Vec3& x) const override { return x; }
  Vec3 derivative(const Vec3&, const Vec3& v, double) const override { return v; }
  nlohmann::ordered_json describe() const override;
};

class AntipodalMap final : public MapEvaluator {
 public:
  Vec3 value(const Vec3& x) const override { return -x; }
  Vec3 derivative(const Vec3&, const Vec3& v, double) const override { return -v; }
  nlohmann::ordered_json describe() const override;
};

/// Degree-zero analytic test map: exponential map at the north pole of the
/// tangent vector T(x) = a (x1 + e x3 + b x2 x3, x2 - b x1 x3 + c x3²).
/// |T| < pi keeps the image off the south pole, so the degree is 0.
class WobbleMap final : public MapEvaluator {
 public:
  struct Params {
    double amplitude = 1.0;
    double shear = 0.5;
    double tilt = 0.4;
    double bend = 0.3;
  };
  WobbleMap() : WobbleMap(Params{}) {}
  explicit WobbleMap(const Params& p);
  Vec3 value(const Vec3& x) const override;
  nlohmann::ordered_json describe() const override;
  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Identity glued to its mirror image across the equator, smoothed:
/// x -> normalize(x1, x2, sqrt(x3² + kappa²)). Image is the open upper hemisphere.
class FoldMap final : public MapEvaluator {
 public:
  explicit FoldMap(double kappa = 0.25);
  Vec3 value(const Vec3& x) const override;
  Vec3 derivative(const Vec3& x, const Vec3& v, double h) const override;
  nlohmann::ordered_json describe() const override;
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

/// Samples at midpoint lat-long nodes (row-major n_phi x n_theta x 3),
/// bilinear in (phi, theta) with periodic theta, renormalized.
class GridMap final : public MapEvaluator {
 public:
  GridMap(int n_phi, int n_theta, std::vector<double> samples);
  static GridMap sample(const MapEvaluator& m, int n_phi, int n_theta);

  Vec3 value(const Vec3& x) const override;
  nlohmann::ordered_json describe() const override;
  int n_phi() const { return n_phi_; }
  int n_theta() const { return n_theta_; }
  std::span<const double> samples() const { return samples_; }
  /// File the samples were read from; echoed by describe().
  const std::string& source() const { return source_; }
  void set_source(std::string path) { source_ = std::move(path); }

 private:
  Vec3 at(int i, int k) const;
  int n_phi_;
  int n_theta_;
  std::vector<double> samples_;
  std::string source_;
};

struct Patch {
  SphericalCap cap;
  MapPtr eval;
};

/// A base evaluator overridden on pairwise disjoint caps by local evaluators.
/// Itself an evaluator, so patched maps nest (φ₂ uses φ₁ as its base).
class SphereMap final : public MapEvaluator {
 public:
  explicit SphereMap(MapPtr base, std::vector<Patch> patches = {});

  UnitVec3 evaluate(const SphericalPoint& p) const { return UnitVec3(value(to_cartesian(p))); }
  Vec3 value(const Vec3& x) const override { return owner(x).value(x); }
  Vec3 derivative(const Vec3& x, const Vec3& v, double h) const override { return owner(x).derivative(x, v, h); }
  nlohmann::ordered_json describe() const override;

  const MapEvaluator& owner(const Vec3& x) const;
  const MapPtr& base() const { return base_; }
  const std::vector<Patch>& patches() const { return patches_; }
  /// Patches of this map and, recursively, of base maps that are SphereMaps.
  std::vector<Patch> all_patches() const;

  SphereMap with_patches(std::vector<Patch> extra) const;

 private:
  MapPtr base_;
  std::vector<Patch> patches_;
};

SphereMap constant_map(const UnitVec3& c);
SphereMap identity_map();
SphereMap antipodal_map();
inline SphereMap wrap(MapPtr m) { return SphereMap(std::move(m)); }

}  // namespace bubblelab
