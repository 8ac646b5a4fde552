#include <cmath>

#include "bubblelab/kernels.hpp"

namespace bubblelab::kernels {

namespace {

long relax_scalar(const RelaxArgs& a, int color, std::size_t sb, std::size_t se) {
  const std::size_t n = static_cast<std::size_t>(a.n), nn = n * n;
  long degenerate = 0;
  for (std::size_t s = sb; s < se; ++s) {
    const InteriorSpan& sp = a.spans[s];
    const std::size_t row = (static_cast<std::size_t>(sp.k) * n + sp.j) * n;
    int i = sp.i0;
    if (((i + sp.j + sp.k) & 1) != color) ++i;
    for (; i <= sp.i1; i += 2) {
      const std::size_t p = row + i;
      const double sx = ((((a.ux[p - 1] + a.ux[p + 1]) + a.ux[p - n]) + a.ux[p + n]) + a.ux[p - nn]) + a.ux[p + nn];
      const double sy = ((((a.uy[p - 1] + a.uy[p + 1]) + a.uy[p - n]) + a.uy[p + n]) + a.uy[p - nn]) + a.uy[p + nn];
      const double sz = ((((a.uz[p - 1] + a.uz[p + 1]) + a.uz[p - n]) + a.uz[p + n]) + a.uz[p - nn]) + a.uz[p + nn];
      const double n2 = (sx * sx + sy * sy) + sz * sz;
      if (n2 == 0.0) {
        ++degenerate;
        continue;
      }
      const double len = std::sqrt(n2);
      a.ux[p] = sx / len;
      a.uy[p] = sy / len;
      a.uz[p] = sz / len;
    }
  }
  return degenerate;
}

double energy_row_scalar(const EnergyArgs& a, int j, int k) {
  const std::size_t n = static_cast<std::size_t>(a.n), nn = n * n;
  const std::size_t row = (static_cast<std::size_t>(k) * n + j) * n;
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = row + i;
    const double ap = a.act[p], ip = a.inter[p];
    const std::size_t q[3] = {p + 1, p + n, p + nn};
    double t = 0.0;
    for (int d = 0; d < 3; ++d) {
      const std::size_t b = q[d];
      const double w = (ap * a.act[b]) * ((ip + a.inter[b]) - ip * a.inter[b]);
      const double dx = a.ux[p] - a.ux[b], dy = a.uy[p] - a.uy[b], dz = a.uz[p] - a.uz[b];
      t = t + w * ((dx * dx + dy * dy) + dz * dz);
    }
    lane[i & 3] += t;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet k{"scalar", &relax_scalar, &energy_row_scalar};
  return k;
}

}  // namespace bubblelab::kernels
