#include <immintrin.h>

#include <cmath>

#include "bubblelab/kernels.hpp"

namespace bubblelab::kernels {

namespace {

inline __m256d sum6(const double* u, std::size_t p, std::size_t n, std::size_t nn) {
  __m256d s = _mm256_add_pd(_mm256_loadu_pd(u + p - 1), _mm256_loadu_pd(u + p + 1));
  s = _mm256_add_pd(s, _mm256_loadu_pd(u + p - n));
  s = _mm256_add_pd(s, _mm256_loadu_pd(u + p + n));
  s = _mm256_add_pd(s, _mm256_loadu_pd(u + p - nn));
  return _mm256_add_pd(s, _mm256_loadu_pd(u + p + nn));
}

long relax_avx2(const RelaxArgs& a, int color, std::size_t sb, std::size_t se) {
  const std::size_t n = static_cast<std::size_t>(a.n), nn = n * n;
  const __m256d zero = _mm256_setzero_pd();
  long degenerate = 0;
  for (std::size_t s = sb; s < se; ++s) {
    const InteriorSpan& sp = a.spans[s];
    const std::size_t row = (static_cast<std::size_t>(sp.k) * n + sp.j) * n;
    for (int i = sp.i0; i <= sp.i1; i += 4) {
      alignas(32) long long lanes[4];
      for (int l = 0; l < 4; ++l) {
        const int ii = i + l;
        lanes[l] = (ii <= sp.i1 && ((ii + sp.j + sp.k) & 1) == color) ? -1LL : 0LL;
      }
      const __m256i want = _mm256_load_si256(reinterpret_cast<const __m256i*>(lanes));
      const std::size_t p = row + i;
      const __m256d sx = sum6(a.ux, p, n, nn);
      const __m256d sy = sum6(a.uy, p, n, nn);
      const __m256d sz = sum6(a.uz, p, n, nn);
      const __m256d n2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(sx, sx), _mm256_mul_pd(sy, sy)), _mm256_mul_pd(sz, sz));
      const __m256d nonzero = _mm256_cmp_pd(n2, zero, _CMP_NEQ_OQ);
      const __m256i store = _mm256_and_si256(want, _mm256_castpd_si256(nonzero));
      const int want_bits = _mm256_movemask_pd(_mm256_castsi256_pd(want));
      const int store_bits = _mm256_movemask_pd(_mm256_castsi256_pd(store));
      degenerate += __builtin_popcount(static_cast<unsigned>(want_bits & ~store_bits));
      if (!store_bits) continue;
      const __m256d len = _mm256_sqrt_pd(n2);
      _mm256_maskstore_pd(a.ux + p, store, _mm256_div_pd(sx, len));
      _mm256_maskstore_pd(a.uy + p, store, _mm256_div_pd(sy, len));
      _mm256_maskstore_pd(a.uz + p, store, _mm256_div_pd(sz, len));
    }
  }
  return degenerate;
}

inline __m256d link_term(const EnergyArgs& a, std::size_t p, std::size_t b, __m256d ap, __m256d ip) {
  const __m256d ib = _mm256_loadu_pd(a.inter + b);
  const __m256d w = _mm256_mul_pd(_mm256_mul_pd(ap, _mm256_loadu_pd(a.act + b)),
                                  _mm256_sub_pd(_mm256_add_pd(ip, ib), _mm256_mul_pd(ip, ib)));
  const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(a.ux + p), _mm256_loadu_pd(a.ux + b));
  const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(a.uy + p), _mm256_loadu_pd(a.uy + b));
  const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(a.uz + p), _mm256_loadu_pd(a.uz + b));
  const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
  return _mm256_mul_pd(w, d2);
}

double energy_row_avx2(const EnergyArgs& a, int j, int k) {
  const std::size_t n = static_cast<std::size_t>(a.n), nn = n * n;
  const std::size_t row = (static_cast<std::size_t>(k) * n + j) * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const std::size_t p = row + i;
    const __m256d ap = _mm256_loadu_pd(a.act + p), ip = _mm256_loadu_pd(a.inter + p);
    __m256d t = _mm256_setzero_pd();
    t = _mm256_add_pd(t, link_term(a, p, p + 1, ap, ip));
    t = _mm256_add_pd(t, link_term(a, p, p + n, ap, ip));
    t = _mm256_add_pd(t, link_term(a, p, p + nn, ap, ip));
    acc = _mm256_add_pd(acc, t);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) {
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

const KernelSet& avx2_kernel_set() {
  static const KernelSet k{"avx2", &relax_avx2, &energy_row_avx2};
  return k;
}

}  // namespace bubblelab::kernels
