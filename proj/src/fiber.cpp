#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "bubblelab/errors.hpp"
#include "bubblelab/parallel.hpp"
#include "bubblelab/singularity.hpp"

namespace bubblelab {

namespace {

// Kuhn split of the unit cube: paths 0 -> e_a -> e_a + e_b -> 7.
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7},
};

struct Frame {
  Vec3 e1, e2, w;
};

Frame complement_frame(const Vec3& w) {
  std::array<int, 3> axes{0, 1, 2};
  const double aw[3] = {std::abs(w.x), std::abs(w.y), std::abs(w.z)};
  std::sort(axes.begin(), axes.end(), [&](int a, int b) { return aw[a] < aw[b]; });
  auto axis = [](int a) { return Vec3{a == 0 ? 1.0 : 0.0, a == 1 ? 1.0 : 0.0, a == 2 ? 1.0 : 0.0}; };
  const Vec3 a = axis(axes[0]), b = axis(axes[1]);
  const Vec3 e1 = normalize(a - dot(a, w) * w);
  const Vec3 e2 = normalize(b - dot(b, w) * w - dot(b, e1) * e1);
  return {e1, e2, w};
}

struct Buffers {
  std::vector<double> f1, f2, g;
};

bool same_strict_sign(const double* v, int count) {
  bool pos = true, neg = true;
  for (int i = 0; i < count; ++i) {
    pos = pos && v[i] > 0.0;
    neg = neg && v[i] < 0.0;
  }
  return pos || neg;
}

struct TetResult {
  double length = 0.0;
  bool candidate = false;
  bool degenerate = false;
};

TetResult tet_fiber(const double f1[4], const double f2[4], const double g[4], const Vec3 x[4]) {
  TetResult r;
  if (same_strict_sign(f1, 4) || same_strict_sign(f2, 4)) return r;
  r.candidate = true;
  for (int i = 0; i < 4; ++i)
    if (std::abs(f1[i]) < 1e-14 && std::abs(f2[i]) < 1e-14 && g[i] > 0.0) {
      r.degenerate = true;
      return r;
    }
  std::array<std::array<double, 4>, 8> pts{};
  int count = 0;
  for (int skip = 0; skip < 4; ++skip) {
    int v[3], t = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) v[t++] = i;
    const double ca = f1[v[1]] * f2[v[2]] - f1[v[2]] * f2[v[1]];
    const double cb = f1[v[2]] * f2[v[0]] - f1[v[0]] * f2[v[2]];
    const double cc = f1[v[0]] * f2[v[1]] - f1[v[1]] * f2[v[0]];
    const double d = ca + cb + cc;
    if (d == 0.0) continue;
    const double la = ca / d, lb = cb / d, lc = cc / d;
    if (la < -1e-12 || lb < -1e-12 || lc < -1e-12) continue;
    std::array<double, 4> lam{};
    lam[v[0]] = std::max(la, 0.0);
    lam[v[1]] = std::max(lb, 0.0);
    lam[v[2]] = std::max(lc, 0.0);
    bool dup = false;
    for (int p = 0; p < count && !dup; ++p) {
      double diff = 0.0;
      for (int i = 0; i < 4; ++i) diff = std::max(diff, std::abs(pts[p][i] - lam[i]));
      dup = diff < 1e-10;
    }
    if (!dup) pts[count++] = lam;
  }
  auto g_at = [&](const std::array<double, 4>& l) { return l[0] * g[0] + l[1] * g[1] + l[2] * g[2] + l[3] * g[3]; };
  auto x_at = [&](const std::array<double, 4>& l) { return l[0] * x[0] + l[1] * x[1] + l[2] * x[2] + l[3] * x[3]; };
  // One point: the line grazes an edge or vertex, zero length.
  if (count < 2) return r;
  if (count > 2) {
    for (int p = 0; p < count; ++p)
      if (g_at(pts[p]) > 0.0) r.degenerate = true;
    return r;
  }
  const double ga = g_at(pts[0]), gb = g_at(pts[1]);
  double t0 = 0.0, t1 = 1.0;
  if (ga <= 0.0 && gb <= 0.0) return r;
  if (ga <= 0.0) t0 = ga / (ga - gb);
  else if (gb <= 0.0) t1 = ga / (ga - gb);
  r.length = norm(x_at(pts[1]) - x_at(pts[0])) * (t1 - t0);
  return r;
}

FiberSample sample_with(const BallField& u, const std::vector<std::size_t>& cells, const Vec3& w, Buffers& buf) {
  const BallLattice& L = u.lattice();
  const Frame fr = complement_frame(w);
  const std::size_t total = L.size();
  buf.f1.resize(total);
  buf.f2.resize(total);
  buf.g.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Vec3 v = u.at(i);
    buf.f1[i] = dot(fr.e1, v);
    buf.f2[i] = dot(fr.e2, v);
    buf.g[i] = dot(fr.w, v);
  }
  const std::size_t n = static_cast<std::size_t>(L.n());
  const double h = L.h();
  FiberSample s;
  std::vector<double> pieces;
  for (std::size_t base : cells) {
    std::size_t c[8];
    double f1[8], f2[8], g[8];
    for (int bit = 0; bit < 8; ++bit) {
      c[bit] = base + (bit & 1) + ((bit >> 1) & 1) * n + ((bit >> 2) & 1) * n * n;
      f1[bit] = buf.f1[c[bit]];
      f2[bit] = buf.f2[c[bit]];
      g[bit] = buf.g[c[bit]];
    }
    if (same_strict_sign(f1, 8) || same_strict_sign(f2, 8)) continue;
    const Vec3 x0 = L.position(base);
    double cell_len = 0.0;
    for (const auto& tet : kTets) {
      double tf1[4], tf2[4], tg[4];
      Vec3 tx[4];
      for (int q = 0; q < 4; ++q) {
        const int bit = tet[q];
        tf1[q] = f1[bit];
        tf2[q] = f2[bit];
        tg[q] = g[bit];
        tx[q] = x0 + Vec3{(bit & 1) * h, ((bit >> 1) & 1) * h, ((bit >> 2) & 1) * h};
      }
      const TetResult r = tet_fiber(tf1, tf2, tg, tx);
      if (!r.candidate) continue;
      ++s.tets;
      if (r.degenerate) ++s.skipped;
      else cell_len += r.length;
    }
    if (cell_len > 0.0) pieces.push_back(cell_len);
  }
  s.length = pairwise_sum(pieces);
  return s;
}

void require_valid(const FiberSample& s, const Vec3& w) {
  if (!s.valid())
    throw NumericalError("fiber_length: " + std::to_string(s.skipped) + " of " + std::to_string(s.tets) +
                         " candidate tetrahedra are degenerate at w = (" + std::to_string(w.x) + ", " + std::to_string(w.y) +
                         ", " + std::to_string(w.z) + ")");
}

}  // namespace

FiberSample fiber_sample(const BallField& u, const UnitVec3& w) {
  Buffers buf;
  return sample_with(u, scanned_cells(u.lattice()), w.vec(), buf);
}

double fiber_length(const BallField& u, const UnitVec3& w) {
  const FiberSample s = fiber_sample(u, w);
  require_valid(s, w.vec());
  return s.length;
}

CoareaResult coarea_check(const BallField& u, const SphereQuadGrid& grid) {
  const std::vector<std::size_t> cells = scanned_cells(u.lattice());
  const auto& nodes = grid.nodes();
  std::vector<FiberSample> samples(nodes.size());
  parallel_chunks(nodes.size(), [&](std::size_t b, std::size_t e) {
    Buffers buf;
    for (std::size_t i = b; i < e; ++i) samples[i] = sample_with(u, cells, nodes[i].x.vec(), buf);
  });
  CoareaResult r;
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    require_valid(samples[i], nodes[i].x.vec());
    r.skipped_tets += samples[i].skipped;
    terms[i] = nodes[i].weight * samples[i].length;
  }
  r.lhs = dirichlet_energy(u);
  r.rhs = 2.0 * pairwise_sum(terms);
  return r;
}

}  // namespace bubblelab
