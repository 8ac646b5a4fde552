#include "bubblelab/singularity.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <cmath>

#include "bubblelab/parallel.hpp"
#include "bubblelab/sphere.hpp"

namespace bubblelab {

using nlohmann::ordered_json;

double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  // Denominator summed in sorted order so that vertex permutations round alike.
  std::array<double, 3> d{dot(a, b), dot(b, c), dot(c, a)};
  std::sort(d.begin(), d.end());
  return 2.0 * std::atan2(triple(a, b, c), 1.0 + ((d[0] + d[1]) + d[2]));
}

namespace {

// Corner bit = dx + 2 dy + 4 dz. Faces listed counter-clockwise seen from
// outside, starting at the face's minimum corner; the diagonal is v0-v2.
constexpr int kFaces[6][4] = {
    {0, 4, 6, 2},  // -x
    {1, 3, 7, 5},  // +x
    {0, 1, 5, 4},  // -y
    {2, 6, 7, 3},  // +y
    {0, 2, 3, 1},  // -z
    {4, 5, 7, 6},  // +z
};

std::size_t corner_index(const BallLattice& L, std::size_t base, int bit) {
  const std::size_t n = static_cast<std::size_t>(L.n());
  return base + (bit & 1) + ((bit >> 1) & 1) * n + ((bit >> 2) & 1) * n * n;
}

double face_angle(const BallField& u, std::size_t base, int f) {
  const BallLattice& L = u.lattice();
  Vec3 v[4];
  for (int t = 0; t < 4; ++t) v[t] = u.at(corner_index(L, base, kFaces[f][t]));
  return solid_angle(v[0], v[1], v[2]) + solid_angle(v[0], v[2], v[3]);
}

CellDegree degree_at(const BallField& u, std::size_t base) {
  std::array<double, 6> parts{};
  for (int f = 0; f < 6; ++f) parts[f] = face_angle(u, base, f);
  CellDegree d;
  d.raw = (((parts[0] + parts[1]) + (parts[2] + parts[3])) + (parts[4] + parts[5])) / (4.0 * kPi);
  const double r = std::round(d.raw);
  d.degree = static_cast<int>(r);
  d.resolved = std::abs(d.raw - r) < 0.2;
  return d;
}

bool all_active(const BallLattice& L, std::size_t base) {
  for (int bit = 0; bit < 8; ++bit)
    if (L.kind(corner_index(L, base, bit)) == NodeKind::outside) return false;
  return true;
}

bool touches_interior(const BallLattice& L, std::size_t base) {
  for (int bit = 0; bit < 8; ++bit)
    if (L.kind(corner_index(L, base, bit)) == NodeKind::interior) return true;
  return false;
}

Cell cell_of(const BallLattice& L, std::size_t base) {
  const std::size_t n = static_cast<std::size_t>(L.n());
  return {static_cast<int>(base % n), static_cast<int>((base / n) % n), static_cast<int>(base / (n * n))};
}

double edge_energy(const BallField& u, std::size_t base) {
  const BallLattice& L = u.lattice();
  double e = 0.0;
  for (int a = 0; a < 8; ++a)
    for (int axis = 0; axis < 3; ++axis) {
      if (a & (1 << axis)) continue;
      const int b = a | (1 << axis);
      e += norm_sq(u.at(corner_index(L, base, a)) - u.at(corner_index(L, base, b)));
    }
  return e * L.h();
}

}  // namespace

std::vector<std::size_t> scanned_cells(const BallLattice& L) {
  std::vector<std::size_t> out;
  const int n = L.n();
  for (int k = 0; k + 1 < n; ++k)
    for (int j = 0; j + 1 < n; ++j)
      for (int i = 0; i + 1 < n; ++i) {
        const std::size_t base = L.index(i, j, k);
        if (L.kind(base) == NodeKind::outside && L.kind(base + 1) == NodeKind::outside) continue;
        if (all_active(L, base)) out.push_back(base);
      }
  return out;
}

CellDegree cell_degree(const BallField& u, const Cell& c) {
  const BallLattice& L = u.lattice();
  if (c.i < 0 || c.j < 0 || c.k < 0 || c.i + 1 >= L.n() || c.j + 1 >= L.n() || c.k + 1 >= L.n())
    throw std::out_of_range("cell_degree: cell outside the lattice");
  const std::size_t base = L.index(c.i, c.j, c.k);
  if (!all_active(L, base)) throw std::invalid_argument("cell_degree: cell has corners outside the ball");
  return degree_at(u, base);
}

bool SingularityReport::conserved() const {
  return unresolved.empty() && interior_degree_sum + trace_degree_sum == total_boundary_degree;
}

SingularityReport detect_singularities(const BallField& u, std::optional<int> map_degree) {
  const BallLattice& L = u.lattice();
  SingularityReport rep;
  rep.h = L.h();
  rep.map_degree = map_degree;
  const std::vector<std::size_t> cells = scanned_cells(L);
  rep.scanned_cells = cells.size();
  std::vector<CellDegree> degs(cells.size());
  parallel_chunks(cells.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) degs[c] = degree_at(u, cells[c]);
  });
  const std::size_t n = static_cast<std::size_t>(L.n());
  const std::size_t step[3] = {1, n, n * n};
  std::vector<double> outer;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::size_t base = cells[c];
    const CellDegree& d = degs[c];
    if (!d.resolved) rep.unresolved.push_back(cell_of(L, base));
    else if (d.degree != 0) {
      SingularCell s;
      s.cell = cell_of(L, base);
      s.center = L.position(base) + Vec3{0.5 * L.h(), 0.5 * L.h(), 0.5 * L.h()};
      s.degree = d.degree;
      s.raw = d.raw;
      s.local_energy = edge_energy(u, base);
      if (touches_interior(L, base)) {
        rep.cells.push_back(s);
        rep.interior_degree_sum += s.degree;
      } else {
        rep.trace_cells.push_back(s);
        rep.trace_degree_sum += s.degree;
      }
    }
    // Outer faces: the neighbouring cube across the face is not scanned.
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t lo = base >= step[axis] ? base - step[axis] : base;
      const bool lo_scanned = base >= step[axis] && std::binary_search(cells.begin(), cells.end(), lo);
      const bool hi_scanned = std::binary_search(cells.begin(), cells.end(), base + step[axis]);
      if (!lo_scanned) outer.push_back(face_angle(u, base, 2 * axis));
      if (!hi_scanned) outer.push_back(face_angle(u, base, 2 * axis + 1));
    }
  }
  rep.boundary_raw = pairwise_sum(outer) / (4.0 * kPi);
  rep.total_boundary_degree = static_cast<int>(std::lround(rep.boundary_raw));
  return rep;
}

ordered_json SingularityReport::to_json() const {
  auto cell_json = [](const SingularCell& s) {
    return ordered_json{{"center", {s.center.x, s.center.y, s.center.z}},
                        {"cell", {s.cell.i, s.cell.j, s.cell.k}},
                        {"degree", s.degree},
                        {"raw", s.raw},
                        {"local_energy", s.local_energy}};
  };
  ordered_json cj = ordered_json::array(), tj = ordered_json::array(), uj = ordered_json::array();
  for (const auto& s : cells) cj.push_back(cell_json(s));
  for (const auto& s : trace_cells) tj.push_back(cell_json(s));
  for (const auto& c : unresolved) uj.push_back({c.i, c.j, c.k});
  ordered_json j = {{"h", h},
                    {"scanned_cells", scanned_cells},
                    {"cells", cj},
                    {"trace_cells", tj},
                    {"unresolved", uj},
                    {"interior_degree_sum", interior_degree_sum},
                    {"trace_degree_sum", trace_degree_sum},
                    {"total_boundary_degree", total_boundary_degree},
                    {"boundary_raw", boundary_raw},
                    {"conserved", conserved()}};
  if (map_degree) j["map_degree"] = *map_degree;
  else j["map_degree"] = nullptr;
  return j;
}

}  // namespace bubblelab
