#include <algorithm>
#include <cmath>

#include "fairknn/simd/kernels.hpp"

namespace fairknn::simd::scalar {
namespace {

void squared_l2(ColumnView m, std::size_t begin, std::size_t end, const double* x, double* out) {
  const std::size_t count = end - begin;
  std::fill(out, out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const double xd = x[d];
    for (std::size_t j = 0; j < count; ++j) {
      const double diff = xd - col[j];
      const double sq = diff * diff;
      out[j] = out[j] + sq;
    }
  }
}

void manhattan(ColumnView m, std::size_t begin, std::size_t end, const double* x, double* out) {
  const std::size_t count = end - begin;
  std::fill(out, out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const double xd = x[d];
    for (std::size_t j = 0; j < count; ++j) {
      out[j] = out[j] + std::fabs(xd - col[j]);
    }
  }
}

void interval_bounds(ColumnView m, std::size_t begin, std::size_t end, const double* x,
                     const double* lo, const double* hi, double* lb_out, double* ub_out) {
  const std::size_t count = end - begin;
  std::fill(lb_out, lb_out + count, 0.0);
  std::fill(ub_out, ub_out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const double xd = x[d];
    const double lod = lo[d];
    const double hid = hi[d];
    for (std::size_t j = 0; j < count; ++j) {
      const double a = xd - col[j];
      const double at_lo = a + lod;
      const double at_hi = a + hid;
      const double sq_lo = at_lo * at_lo;
      const double sq_hi = at_hi * at_hi;
      // Vertex of (a + delta)^2 sits at delta = -a.
      const bool straddles = at_lo <= 0.0 && at_hi >= 0.0;
      const double lb = straddles ? 0.0 : std::min(sq_lo, sq_hi);
      lb_out[j] = lb_out[j] + lb;
      ub_out[j] = ub_out[j] + std::max(sq_lo, sq_hi);
    }
  }
}

}  // namespace

const Kernels kKernels{"scalar", &squared_l2, &manhattan, &interval_bounds};

}  // namespace fairknn::simd::scalar
