#pragma once

#include <cstddef>
#include <string>

#include "bubblelab/lattice.hpp"

namespace bubblelab::kernels {

struct RelaxArgs {
  int n;
  double* ux;
  double* uy;
  double* uz;
  const InteriorSpan* spans;
};

struct EnergyArgs {
  int n;
  const double* ux;
  const double* uy;
  const double* uz;
  const double* act;
  const double* inter;
};

/// Updates the nodes of one colour ((i + j + k) % 2 == color) in spans
/// [span_begin, span_end): u ← s/|s| with s the neighbour sum added in the
/// order −x, +x, −y, +y, −z, +z. Nodes with s = 0 keep their value.
/// Returns the number of such degenerate nodes.
using RelaxFn = long (*)(const RelaxArgs&, int color, std::size_t span_begin, std::size_t span_end);

/// Energy of the +x, +y, +z links of the nodes of row (j, k), accumulated in
/// four lanes by i mod 4 and combined as (l0 + l1) + (l2 + l3). Not scaled by h.
using EnergyRowFn = double (*)(const EnergyArgs&, int j, int k);

struct KernelSet {
  const char* name;
  RelaxFn relax;
  EnergyRowFn energy_row;
};

const KernelSet& scalar_kernels();
/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2.
const KernelSet* avx2_kernels();
/// AVX2 when available unless $BUBBLELAB_SIMD=scalar; otherwise scalar.
const KernelSet& active_kernels();
/// Force a variant by name ("scalar", "avx2"); returns false if unavailable.
bool select_kernels(const std::string& name);

}  // namespace bubblelab::kernels
