#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "fairknn/simd/kernels.hpp"

namespace fairknn::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

// Lane j of every accumulator follows exactly the scalar sequence
// out = out + f(x[d] - col[j]) over d = 0..dims-1, so results match the
// scalar reference bit for bit.

void squared_l2(ColumnView m, std::size_t begin, std::size_t end, const double* x, double* out) {
  const std::size_t count = end - begin;
  const std::size_t vec_end = count - count % kLanes;
  std::fill(out, out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const __m256d xd = _mm256_set1_pd(x[d]);
    std::size_t j = 0;
    for (; j < vec_end; j += kLanes) {
      const __m256d diff = _mm256_sub_pd(xd, _mm256_loadu_pd(col + j));
      const __m256d acc = _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_mul_pd(diff, diff));
      _mm256_storeu_pd(out + j, acc);
    }
    for (; j < count; ++j) {
      const double diff = x[d] - col[j];
      out[j] = out[j] + diff * diff;
    }
  }
}

void manhattan(ColumnView m, std::size_t begin, std::size_t end, const double* x, double* out) {
  const std::size_t count = end - begin;
  const std::size_t vec_end = count - count % kLanes;
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::fill(out, out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const __m256d xd = _mm256_set1_pd(x[d]);
    std::size_t j = 0;
    for (; j < vec_end; j += kLanes) {
      const __m256d diff = _mm256_sub_pd(xd, _mm256_loadu_pd(col + j));
      const __m256d abs = _mm256_andnot_pd(sign, diff);
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), abs));
    }
    for (; j < count; ++j) {
      out[j] = out[j] + std::fabs(x[d] - col[j]);
    }
  }
}

void interval_bounds(ColumnView m, std::size_t begin, std::size_t end, const double* x,
                     const double* lo, const double* hi, double* lb_out, double* ub_out) {
  const std::size_t count = end - begin;
  const std::size_t vec_end = count - count % kLanes;
  const __m256d zero = _mm256_setzero_pd();
  std::fill(lb_out, lb_out + count, 0.0);
  std::fill(ub_out, ub_out + count, 0.0);
  for (std::size_t d = 0; d < m.dims; ++d) {
    const double* col = m.data + d * m.rows + begin;
    const __m256d xd = _mm256_set1_pd(x[d]);
    const __m256d lod = _mm256_set1_pd(lo[d]);
    const __m256d hid = _mm256_set1_pd(hi[d]);
    std::size_t j = 0;
    for (; j < vec_end; j += kLanes) {
      const __m256d a = _mm256_sub_pd(xd, _mm256_loadu_pd(col + j));
      const __m256d at_lo = _mm256_add_pd(a, lod);
      const __m256d at_hi = _mm256_add_pd(a, hid);
      const __m256d sq_lo = _mm256_mul_pd(at_lo, at_lo);
      const __m256d sq_hi = _mm256_mul_pd(at_hi, at_hi);
      const __m256d straddles = _mm256_and_pd(_mm256_cmp_pd(at_lo, zero, _CMP_LE_OQ),
                                              _mm256_cmp_pd(at_hi, zero, _CMP_GE_OQ));
      const __m256d lb = _mm256_andnot_pd(straddles, _mm256_min_pd(sq_lo, sq_hi));
      _mm256_storeu_pd(lb_out + j, _mm256_add_pd(_mm256_loadu_pd(lb_out + j), lb));
      _mm256_storeu_pd(ub_out + j,
                       _mm256_add_pd(_mm256_loadu_pd(ub_out + j), _mm256_max_pd(sq_lo, sq_hi)));
    }
    for (; j < count; ++j) {
      const double a = x[d] - col[j];
      const double at_lo = a + lo[d];
      const double at_hi = a + hi[d];
      const double sq_lo = at_lo * at_lo;
      const double sq_hi = at_hi * at_hi;
      const bool straddles = at_lo <= 0.0 && at_hi >= 0.0;
      lb_out[j] = lb_out[j] + (straddles ? 0.0 : std::min(sq_lo, sq_hi));
      ub_out[j] = ub_out[j] + std::max(sq_lo, sq_hi);
    }
  }
}

}  // namespace

const Kernels kKernels{"avx2", &squared_l2, &manhattan, &interval_bounds};

}  // namespace fairknn::simd::avx2
