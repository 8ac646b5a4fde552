#include "bubblelab/construction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bubblelab/errors.hpp"
#include "bubblelab/map_functionals.hpp"
#include "bubblelab/map_io.hpp"

namespace bubblelab {

using nlohmann::ordered_json;

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

struct LmResult {
  Vec3 x;
  double residual;
};

// Levenberg-Marquardt on F(x) = m(x) − m(−x) in the tangent chart at the current iterate.
LmResult refine_antipodal(const MapEvaluator& m, Vec3 x) {
  auto F = [&](const Vec3& p) { return m.value(p) - m.value(-p); };
  Vec3 f = F(x);
  double res = norm(f);
  double mu = 1e-3;
  for (int it = 0; it < 200 && res > 1e-14; ++it) {
    const TangentFrame tf = any_frame(x);
    const Vec3 c1 = m.derivative(x, tf.e1, 1e-6) + m.derivative(-x, tf.e1, 1e-6);
    const Vec3 c2 = m.derivative(x, tf.e2, 1e-6) + m.derivative(-x, tf.e2, 1e-6);
    const double a11 = dot(c1, c1), a12 = dot(c1, c2), a22 = dot(c2, c2);
    const double g1 = -dot(c1, f), g2 = -dot(c2, f);
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      const double b11 = a11 + mu * (1.0 + a11), b22 = a22 + mu * (1.0 + a22);
      const double det = b11 * b22 - a12 * a12;
      if (!(std::abs(det) > 0.0)) {
        mu *= 4.0;
        continue;
      }
      const double s1 = (b22 * g1 - a12 * g2) / det, s2 = (b11 * g2 - a12 * g1) / det;
      const Vec3 xn = normalize(x + s1 * tf.e1 + s2 * tf.e2);
      const Vec3 fn = F(xn);
      const double rn = norm(fn);
      if (rn < res) {
        x = xn;
        f = fn;
        res = rn;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  return {x, res};
}

std::optional<AntipodalPair> scan_and_refine(const MapEvaluator& m, const SphereQuadGrid& grid) {
  struct Cand {
    double g;
    Vec3 x;
  };
  std::vector<Cand> cands;
  cands.reserve(grid.size());
  for (const auto& n : grid.nodes()) cands.push_back({distance(m.value(n.x), m.value(-n.x.vec())), n.x});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.g != b.g) return a.g < b.g;
    return a.x.z > b.x.z;
  });
  // Try the best few well-separated candidates.
  std::vector<Vec3> tried;
  for (const auto& c : cands) {
    if (tried.size() >= 8) break;
    bool near = false;
    for (const auto& t : tried)
      if (distance(t, c.x) < 0.05 || distance(t, -c.x) < 0.05) near = true;
    if (near) continue;
    tried.push_back(c.x);
    if (c.g == 0.0) return AntipodalPair{UnitVec3(c.x), 0.0};
    const LmResult r = refine_antipodal(m, c.x);
    if (r.residual < kAntipodalTol) return AntipodalPair{UnitVec3(r.x), r.residual};
  }
  return std::nullopt;
}

}  // namespace

AntipodalPair search_antipodal_pair(const MapEvaluator& m, const SphereQuadGrid& grid) {
  if (auto r = scan_and_refine(m, grid)) return *r;
  if (auto r = scan_and_refine(m, grid.refined(2))) return *r;
  throw NumericalError("find_antipodal_pair: no pair with |m(q) - m(-q)| < 1e-6 after one grid refinement; "
                       "the map is probably not of degree zero or the grid is too coarse");
}

AntipodalPair find_antipodal_pair(const MapEvaluator& m, const SphereQuadGrid& grid) {
  const double deg = degree_integral(m, adapted_grid(m, grid.resolution()));
  if (std::lround(deg) != 0)
    throw std::invalid_argument("find_antipodal_pair: map has degree " + std::to_string(std::lround(deg)) + ", need 0");
  return search_antipodal_pair(m, grid);
}

DeltaChoice select_delta(const MapEvaluator& m, const UnitVec3& q, double eps, GridResolution res) {
  (void)q;
  if (!(eps > 0.0)) throw std::domain_error("select_delta: eps must be positive");
  DeltaChoice out;
  out.max_grad_sq = max_grad_sq(m, build_quad_grid(res.n_phi, res.n_theta));
  out.delta = 0.9 * eps / (4.0 * std::sqrt(16.0 * kPi * (out.max_grad_sq + 1.0)));
  // |J| <= |∇m|²/2, so each 2δ cap has image area at most (G/2) π (2δ)².
  auto image_bound = [&](double d) { return out.max_grad_sq * 4.0 * kPi * d * d; };
  while (2.0 * out.delta > std::sqrt(2.0) || !(image_bound(out.delta) < 4.0 * kPi)) {
    out.delta *= 0.5;
    ++out.halvings;
  }
  out.image_area_bound = image_bound(out.delta);
  return out;
}

SquashCapEvaluator::SquashCapEvaluator(const UnitVec3& center, double delta, MapPtr base)
    : center_(center), delta_(delta), base_(std::move(base)) {
  if (!base_) throw std::invalid_argument("squash cap: null base");
  if (!(delta > 0.0 && 2.0 * delta <= std::sqrt(2.0))) throw std::invalid_argument("squash cap: need 0 < 2δ <= √2");
  t1_ = chord_to_angle(delta);
  t2_ = chord_to_angle(2.0 * delta);
  constant_ = base_->value(center_);
}

Vec3 SquashCapEvaluator::value(const Vec3& x) const {
  const double psi = angle_between(center_, x);
  if (psi <= t1_) return constant_;
  if (psi >= t2_) return base_->value(x);
  const double s = t2_ * (psi - t1_) / (t2_ - t1_);
  const Vec3 u = normalize(x - std::cos(psi) * center_.vec());
  return base_->value(std::cos(s) * center_.vec() + std::sin(s) * u);
}

Vec3 SquashCapEvaluator::derivative(const Vec3& x, const Vec3& v, double h) const {
  const double psi = angle_between(center_, x);
  if (psi <= t1_) return {};
  if (psi >= t2_) return base_->derivative(x, v, h);
  const double k = t2_ / (t2_ - t1_);
  const double s = k * (psi - t1_);
  const Vec3& c = center_.vec();
  const Vec3 u = normalize(x - std::cos(psi) * c);
  const Vec3 er_x = std::cos(psi) * u - std::sin(psi) * c;
  const double vr = dot(v, er_x);
  const Vec3 vt = v - vr * er_x;
  const Vec3 p = std::cos(s) * c + std::sin(s) * u;
  const Vec3 er_p = std::cos(s) * u - std::sin(s) * c;
  return base_->derivative(p, k * vr * er_p + (std::sin(s) / std::sin(psi)) * vt, h);
}

ordered_json SquashCapEvaluator::describe() const {
  return {{"kind", "squash_cap"}, {"params", {{"center", vec_json(center_)}, {"delta", delta_}, {"base", base_->describe()}}}};
}

SphereMap build_phi1(const Phi1Spec& spec) {
  if (!spec.base) throw std::invalid_argument("build_phi1: null base");
  std::vector<Patch> caps;
  for (const UnitVec3& c : {spec.q, -spec.q})
    caps.push_back({SphericalCap(c, 2.0 * spec.delta), std::make_shared<SquashCapEvaluator>(c, spec.delta, spec.base)});
  return SphereMap(spec.base, std::move(caps));
}

BubbleEvaluator::BubbleEvaluator(const BubbleSpec& spec) : spec_(spec), c_(bubble_constants(spec.j)) {
  if (spec.j < 2) throw std::invalid_argument("bubble: j must be >= 2");
  if (spec.orientation != 1 && spec.orientation != -1) throw std::invalid_argument("bubble: orientation must be +1 or -1");
  if (!(spec.amplitude >= 0.0 && spec.amplitude <= 1.0)) throw std::invalid_argument("bubble: amplitude outside [0, 1]");
  psi_outer_ = chord_to_angle(1.0 / spec.j);
  // Frame at −center, so that azimuth around the center and around the target
  // agree for the identity-like orientation.
  const TangentFrame e = any_frame(-spec.center.vec());
  const TangentFrame f = any_frame(spec.target.vec());
  e1_ = e.e1;
  e2_ = e.e2;
  f1_ = f.e1;
  f2_ = f.e2;
}

std::pair<double, double> BubbleEvaluator::profile(double psi) const {
  if (psi >= psi_outer_) return {0.0, 0.0};
  if (spec_.profile == BubbleProfile::cone) return {kPi * (1.0 - psi / psi_outer_), -kPi / psi_outer_};
  const double rho = std::tan(0.5 * psi);
  const double drho = 0.5 * (1.0 + rho * rho);
  if (rho <= c_.r) return {kPi - rho * c_.beta / c_.r, -c_.beta / c_.r * drho};
  if (rho < c_.beta) {
    const double lr = c_.lambda * rho;
    return {2.0 * std::atan(1.0 / lr), -2.0 * c_.lambda / (1.0 + lr * lr) * drho};
  }
  if (rho < c_.d) return {c_.d - rho, -drho};
  return {0.0, 0.0};
}

Vec3 BubbleEvaluator::value(const Vec3& x) const {
  const Vec3 y = spec_.mirror ? -x : x;
  const double a = dot(y, e1_), b = dot(y, e2_), z = dot(y, spec_.center.vec());
  const double psi = std::atan2(std::hypot(a, b), z);
  const double F = spec_.amplitude * profile(psi).first;
  if (F == 0.0) return spec_.target;
  const double th = spec_.orientation * std::atan2(b, a);
  const double sf = std::sin(F);
  return std::cos(F) * spec_.target.vec() + sf * std::cos(th) * f1_ + sf * std::sin(th) * f2_;
}

Vec3 BubbleEvaluator::derivative(const Vec3& x, const Vec3& v, double) const {
  const Vec3 y = spec_.mirror ? -x : x;
  const Vec3 vy = spec_.mirror ? -v : v;
  const double a = dot(y, e1_), b = dot(y, e2_), z = dot(y, spec_.center.vec());
  const double s = std::hypot(a, b);
  const double psi = std::atan2(s, z);
  const auto [F0, dF0] = profile(psi);
  if (F0 == 0.0 || s == 0.0) return {};
  const double F = spec_.amplitude * F0;
  const double da = dot(vy, e1_), db = dot(vy, e2_), dz = dot(vy, spec_.center.vec());
  const double dpsi = z * (a * da + b * db) / s - s * dz;
  const double dth = spec_.orientation * (a * db - b * da) / (s * s);
  const double dF = spec_.amplitude * dF0 * dpsi;
  const double th = spec_.orientation * std::atan2(b, a);
  const double ct = std::cos(th), st = std::sin(th);
  const Vec3 u = ct * f1_ + st * f2_;
  const Vec3 w = -st * f1_ + ct * f2_;
  return dF * (-std::sin(F) * spec_.target.vec() + std::cos(F) * u) + (std::sin(F) * dth) * w;
}

std::vector<double> BubbleEvaluator::radial_breaks() const {
  if (spec_.profile == BubbleProfile::cone) return {psi_outer_};
  return {2.0 * std::atan(c_.r), 2.0 * std::atan(c_.beta), psi_outer_};
}

namespace {
const char* profile_name(BubbleProfile p) { return p == BubbleProfile::cone ? "cone" : "stereographic"; }
BubbleProfile profile_from(const std::string& s) {
  if (s == "cone") return BubbleProfile::cone;
  if (s == "stereographic") return BubbleProfile::stereographic;
  throw ConfigError("unknown bubble profile '" + s + "'");
}
}  // namespace

ordered_json BubbleEvaluator::describe() const {
  return {{"kind", "bubble"},
          {"params",
           {{"center", vec_json(spec_.center)},
            {"j", spec_.j},
            {"target", vec_json(spec_.target)},
            {"orientation", spec_.orientation},
            {"mirror", spec_.mirror},
            {"profile", profile_name(spec_.profile)},
            {"amplitude", spec_.amplitude}}}};
}

Patch build_bubble(const BubbleSpec& spec, const MapEvaluator* base) {
  const SphericalCap cap(spec.cap_center(), spec.cap_radius());
  if (base) {
    const Rotation R = rotate_taking(UnitVec3(kNorthPole), cap.center());
    const double rad = cap.geodesic_radius();
    for (int i = 0; i <= 4; ++i)
      for (int k = 0; k < 8; ++k) {
        const double psi = 0.999 * rad * i / 4.0, th = kTwoPi * k / 8.0;
        const Vec3 x = R.apply(Vec3{std::sin(psi) * std::cos(th), std::sin(psi) * std::sin(th), std::cos(psi)});
        if (distance(base->value(x), spec.target) > 1e-9)
          throw std::invalid_argument("build_bubble: base map is not constant on the bubble cap");
      }
  }
  return {cap, std::make_shared<BubbleEvaluator>(spec)};
}

Phi2Spec Phi2Spec::make(const Phi1Spec& phi1, int N, int j, BubbleProfile profile) {
  Phi2Spec s;
  s.phi1 = phi1;
  s.N = N;
  s.j = j;
  s.profile = profile;
  s.alpha = 4.0 * std::asin(0.5 * phi1.delta);
  const Rotation Q = rotate_taking(UnitVec3(kNorthPole), phi1.q);
  for (int i = 1; i <= N; ++i) {
    const double a = i * s.alpha / (2.0 * (N + 1));
    s.xis.push_back(Q.apply(UnitVec3(0.0, std::sin(a), std::cos(a))));
  }
  return s;
}

void Phi2Spec::validate() const {
  if (N < 1) throw std::invalid_argument("phi2: N must be >= 1");
  if (j < 2) throw std::invalid_argument("phi2: j must be >= 2");
  if (static_cast<int>(xis.size()) != N) throw std::invalid_argument("phi2: need exactly N points xi");
  if (!(2.0 / j < phi1.delta / (4.0 * N)))
    throw std::invalid_argument("phi2: bubble radius 2/j must be below delta/(4N)");
  const SphericalCap north(phi1.q, phi1.delta), south(-phi1.q, phi1.delta);
  std::vector<SphericalCap> caps;
  for (const auto& xi : xis) {
    caps.emplace_back(xi, 2.0 / j);
    caps.emplace_back(-xi, 2.0 / j);
    if (!caps[caps.size() - 2].inside(north) || !caps.back().inside(south))
      throw std::invalid_argument("phi2: bubble cap not contained in the constant caps");
  }
  for (std::size_t a = 0; a < caps.size(); ++a)
    for (std::size_t b = a + 1; b < caps.size(); ++b)
      if (!caps[a].disjoint_from(caps[b])) throw std::invalid_argument("phi2: bubble caps overlap");
}

SphereMap build_phi2(const Phi2Spec& spec) {
  spec.validate();
  const SphereMap phi1 = build_phi1(spec.phi1);
  std::vector<Patch> bubbles;
  for (const auto& xi : spec.xis) {
    BubbleSpec b;
    b.center = xi;
    b.j = spec.j;
    b.profile = spec.profile;
    b.amplitude = spec.amplitude;
    b.target = UnitVec3(phi1.value(xi));
    bubbles.push_back(build_bubble(b, &phi1));
  }
  for (const auto& xi : spec.xis) {
    BubbleSpec b;
    b.center = xi;
    b.j = spec.j;
    b.profile = spec.profile;
    b.amplitude = spec.amplitude;
    b.mirror = true;
    b.target = UnitVec3(phi1.value(-xi));
    bubbles.push_back(build_bubble(b, &phi1));
  }
  return phi1.with_patches(std::move(bubbles));
}

int smallest_admissible_j(double delta, int N) {
  if (!(delta > 0.0) || N < 1) throw std::invalid_argument("smallest_admissible_j: bad inputs");
  return std::max(2, static_cast<int>(std::floor(8.0 * N / delta)) + 1);
}

ordered_json plan_to_json(const Phi2Spec& s) {
  ordered_json xis = ordered_json::array(), orient = ordered_json::array();
  for (const auto& xi : s.xis) {
    xis.push_back(vec_json(xi));
    orient.push_back(1);
  }
  for (std::size_t i = 0; i < s.xis.size(); ++i) orient.push_back(-1);
  ordered_json out = {{"kind", "plan"},
                      {"base_map", s.phi1.base->describe()},
                      {"q", vec_json(s.phi1.q)},
                      {"delta", s.phi1.delta},
                      {"N", s.N},
                      {"j", s.j},
                      {"alpha", s.alpha},
                      {"xis", xis},
                      {"orientations", orient},
                      {"profile", profile_name(s.profile)}};
  if (s.amplitude != 1.0) out["amplitude"] = s.amplitude;
  return out;
}

Phi2Spec plan_from_json(const ordered_json& js) {
  try {
    Phi1Spec p1;
    p1.base = map_from_json(js.at("base_map"));
    const int N = js.value("N", 1);
    if (js.at("q").is_string()) {
      if (js.at("q") != "auto") throw ConfigError("plan: q must be a 3-vector or \"auto\"");
      p1.q = find_antipodal_pair(*p1.base, build_quad_grid(180, 360)).q;
    } else {
      const auto& q = js.at("q");
      p1.q = UnitVec3(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>());
    }
    if (js.at("delta").is_string()) {
      if (js.at("delta") != "auto") throw ConfigError("plan: delta must be a number or \"auto\"");
      p1.delta = select_delta(*p1.base, p1.q, js.value("eps", 1.0)).delta;
    } else {
      p1.delta = js.at("delta").get<double>();
    }
    int j = 0;
    if (js.at("j").is_string()) {
      if (js.at("j") != "auto") throw ConfigError("plan: j must be an integer or \"auto\"");
      j = smallest_admissible_j(p1.delta, N);
    } else {
      j = js.at("j").get<int>();
    }
    Phi2Spec s = Phi2Spec::make(p1, N, j, profile_from(js.value("profile", std::string("stereographic"))));
    s.amplitude = js.value("amplitude", 1.0);
    if (js.contains("xis")) {
      const auto& given = js.at("xis");
      if (given.size() != s.xis.size()) throw ConfigError("plan: xis do not match N");
      for (std::size_t i = 0; i < s.xis.size(); ++i) {
        const Vec3 g{given[i].at(0).get<double>(), given[i].at(1).get<double>(), given[i].at(2).get<double>()};
        if (distance(g, s.xis[i]) > 1e-9) throw ConfigError("plan: xis disagree with q, delta and N");
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("plan descriptor: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("plan descriptor: ") + e.what());
  }
}

}  // namespace bubblelab
