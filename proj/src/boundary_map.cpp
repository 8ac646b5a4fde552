#include "bubblelab/boundary_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubblelab {

using nlohmann::ordered_json;

Vec3 finite_difference(const MapEvaluator& m, const Vec3& x, const Vec3& v, double h) {
  const double len = norm(v);
  if (len == 0.0) return {};
  const Vec3 dir = v / len;
  const Vec3 xp = std::cos(h) * x + std::sin(h) * dir;
  const Vec3 xm = std::cos(h) * x - std::sin(h) * dir;
  return (m.value(xp) - m.value(xm)) * (len / (2.0 * h));
}

Vec3 MapEvaluator::derivative(const Vec3& x, const Vec3& v, double h) const { return finite_difference(*this, x, v, h); }

namespace {
ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }
}  // namespace

ordered_json ConstantMap::describe() const { return {{"kind", "constant"}, {"params", {{"value", vec_json(c_)}}}}; }
ordered_json IdentityMap::describe() const { return {{"kind", "identity"}, {"params", ordered_json::object()}}; }
ordered_json AntipodalMap::describe() const { return {{"kind", "antipodal"}, {"params", ordered_json::object()}}; }

WobbleMap::WobbleMap(const Params& p) : p_(p) {
  // |T| <= a (sqrt(1 + e²) + b/2 + c)
  const double bound = p.amplitude * (std::sqrt(1.0 + p.tilt * p.tilt) + 0.5 * std::abs(p.shear) + std::abs(p.bend));
  if (!(p.amplitude >= 0.0) || !(bound < kPi)) throw std::invalid_argument("wobble: parameters allow |T| >= pi");
}

Vec3 WobbleMap::value(const Vec3& x) const {
  const auto& [a, b, e, c] = p_;
  const double t1 = a * (x.x + e * x.z + b * x.y * x.z);
  const double t2 = a * (x.y - b * x.x * x.z + c * x.z * x.z);
  const double t = std::hypot(t1, t2);
  const double sinc = t < 1e-8 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
  return normalize(Vec3{sinc * t1, sinc * t2, std::cos(t)});
}

ordered_json WobbleMap::describe() const {
  return {{"kind", "wobble"},
          {"params", {{"amplitude", p_.amplitude}, {"shear", p_.shear}, {"tilt", p_.tilt}, {"bend", p_.bend}}}};
}

FoldMap::FoldMap(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("fold: kappa must be positive");
}

Vec3 FoldMap::value(const Vec3& x) const { return normalize(Vec3{x.x, x.y, std::hypot(x.z, kappa_)}); }

Vec3 FoldMap::derivative(const Vec3& x, const Vec3& v, double) const {
  const double s = std::hypot(x.z, kappa_);
  const Vec3 f{x.x, x.y, s};
  const double len = norm(f);
  const Vec3 m = f / len;
  const Vec3 df{v.x, v.y, x.z * v.z / s};
  return (df - dot(m, df) * m) / len;
}

ordered_json FoldMap::describe() const { return {{"kind", "fold"}, {"params", {{"kappa", kappa_}}}}; }

GridMap::GridMap(int n_phi, int n_theta, std::vector<double> samples)
    : n_phi_(n_phi), n_theta_(n_theta), samples_(std::move(samples)) {
  if (n_phi < 2 || n_theta < 2) throw std::invalid_argument("grid map: need at least 2x2 samples");
  if (samples_.size() != static_cast<std::size_t>(n_phi) * n_theta * 3)
    throw std::invalid_argument("grid map: sample count does not match n_phi x n_theta x 3");
  for (std::size_t i = 0; i < samples_.size(); i += 3) {
    const Vec3 s{samples_[i], samples_[i + 1], samples_[i + 2]};
    if (!(norm(s) > 0.0)) throw std::invalid_argument("grid map: zero sample");
  }
}

GridMap GridMap::sample(const MapEvaluator& m, int n_phi, int n_theta) {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(n_phi) * n_theta * 3);
  for (int i = 0; i < n_phi; ++i)
    for (int k = 0; k < n_theta; ++k) {
      const Vec3 v = m.value(to_cartesian({(i + 0.5) * kPi / n_phi, (k + 0.5) * kTwoPi / n_theta}));
      s.insert(s.end(), {v.x, v.y, v.z});
    }
  return GridMap(n_phi, n_theta, std::move(s));
}

Vec3 GridMap::at(int i, int k) const {
  const std::size_t o = (static_cast<std::size_t>(i) * n_theta_ + k) * 3;
  return {samples_[o], samples_[o + 1], samples_[o + 2]};
}

Vec3 GridMap::value(const Vec3& x) const {
  const SphericalPoint p = to_spherical(x);
  // Node i sits at phi = (i + 1/2) Δphi; clamp at the polar caps.
  const double u = std::clamp(p.phi / (kPi / n_phi_) - 0.5, 0.0, n_phi_ - 1.0);
  const double w = p.theta / (kTwoPi / n_theta_) - 0.5;
  const int i0 = std::min(static_cast<int>(u), n_phi_ - 2);
  const double fu = u - i0;
  const double wf = std::floor(w);
  const double fw = w - wf;
  const int k0 = ((static_cast<int>(wf) % n_theta_) + n_theta_) % n_theta_;
  const int k1 = (k0 + 1) % n_theta_;
  const Vec3 v = (1 - fu) * ((1 - fw) * at(i0, k0) + fw * at(i0, k1)) + fu * ((1 - fw) * at(i0 + 1, k0) + fw * at(i0 + 1, k1));
  return normalize(v);
}

ordered_json GridMap::describe() const {
  ordered_json params = {{"n_phi", n_phi_}, {"n_theta", n_theta_}};
  if (!source_.empty()) params["path"] = source_;
  return {{"kind", "grid"}, {"params", params}};
}

SphereMap::SphereMap(MapPtr base, std::vector<Patch> patches) : base_(std::move(base)), patches_(std::move(patches)) {
  if (!base_) throw std::invalid_argument("SphereMap: null base evaluator");
  for (std::size_t a = 0; a < patches_.size(); ++a) {
    if (!patches_[a].eval) throw std::invalid_argument("SphereMap: null patch evaluator");
    for (std::size_t b = a + 1; b < patches_.size(); ++b)
      if (!patches_[a].cap.disjoint_from(patches_[b].cap)) throw std::invalid_argument("SphereMap: patch caps overlap");
  }
}

const MapEvaluator& SphereMap::owner(const Vec3& x) const {
  for (const auto& p : patches_)
    if (p.cap.contains(x)) return *p.eval;
  if (const auto* inner = dynamic_cast<const SphereMap*>(base_.get())) return inner->owner(x);
  return *base_;
}

std::vector<Patch> SphereMap::all_patches() const {
  std::vector<Patch> out = patches_;
  if (const auto* inner = dynamic_cast<const SphereMap*>(base_.get())) {
    auto more = inner->all_patches();
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

SphereMap SphereMap::with_patches(std::vector<Patch> extra) const {
  return SphereMap(std::make_shared<SphereMap>(*this), std::move(extra));
}

ordered_json SphereMap::describe() const {
  if (patches_.empty()) return base_->describe();
  ordered_json list = ordered_json::array();
  for (const auto& p : patches_)
    list.push_back({{"center", vec_json(p.cap.center())}, {"radius", p.cap.chordal_radius()}, {"map", p.eval->describe()}});
  return {{"kind", "patched"}, {"params", {{"base", base_->describe()}}}, {"patches", list}};
}

SphereMap constant_map(const UnitVec3& c) { return SphereMap(std::make_shared<ConstantMap>(c)); }
SphereMap identity_map() { return SphereMap(std::make_shared<IdentityMap>()); }
SphereMap antipodal_map() { return SphereMap(std::make_shared<AntipodalMap>()); }

}  // namespace bubblelab
