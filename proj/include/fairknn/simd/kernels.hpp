#pragma once

// Data-parallel inner loops over the column-major attribute matrix.
//
// Every kernel exists as a scalar reference and (on x86-64) an AVX2 variant.
// The variants perform the same IEEE operations in the same order per lane
// and never contract into FMA, so their outputs are bit-identical. That is
// what keeps K-NN tie-breaking and over_nn membership independent of the
// instruction set picked at runtime.

#include <cstddef>

namespace fairknn::simd {

struct ColumnView {
  const double* data = nullptr;  // column d starts at data + d * rows
  std::size_t rows = 0;
  std::size_t dims = 0;
};

// out[j - begin] = sum_d (x[d] - m[d][j])^2 for j in [begin, end)
using SquaredL2Fn = void (*)(ColumnView m, std::size_t begin, std::size_t end, const double* x,
                             double* out);

// out[j - begin] = sum_d |x[d] - m[d][j]|
using ManhattanFn = void (*)(ColumnView m, std::size_t begin, std::size_t end, const double* x,
                             double* out);

// Squared-distance bounds over the offset box [lo, hi]: with
// A = x[d] - m[d][j], per dimension min/max of (A + delta)^2 for delta in
// [lo[d], hi[d]], summed across dimensions.
using IntervalBoundsFn = void (*)(ColumnView m, std::size_t begin, std::size_t end,
                                  const double* x, const double* lo, const double* hi,
                                  double* lb_out, double* ub_out);

struct Kernels {
  const char* name;
  SquaredL2Fn squared_l2;
  ManhattanFn manhattan;
  IntervalBoundsFn interval_bounds;
};

enum class Isa { kScalar, kAvx2 };

const char* to_string(Isa isa);

// Best instruction set supported by this CPU and build.
Isa detected_isa();
bool supported(Isa isa);

// Currently selected kernels. Initialised from FAIRKNN_ISA (scalar|avx2) if
// set, otherwise detected_isa().
const Kernels& active();
Isa active_isa();

// Throws std::invalid_argument if the ISA is unavailable.
void select(Isa isa);

const Kernels& kernels_for(Isa isa);

namespace scalar {
extern const Kernels kKernels;
}
#if defined(FAIRKNN_HAVE_AVX2)
namespace avx2 {
extern const Kernels kKernels;
}
#endif

}  // namespace fairknn::simd
