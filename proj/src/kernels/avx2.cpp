// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "spcm/kernels.hpp"

namespace spcm::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void squared_distances(std::span<const double> columns, std::size_t n,
                       std::span<const double> point, std::span<double> out) {
  const std::size_t dims = point.size();
  const std::size_t vec_end = n & ~std::size_t{3};
  double* dst = out.data();

  for (std::size_t i = 0; i < vec_end; i += 4) _mm256_storeu_pd(dst + i, _mm256_setzero_pd());
  for (std::size_t i = vec_end; i < n; ++i) dst[i] = 0.0;

  for (std::size_t q = 0; q < dims; ++q) {
    const double* col = columns.data() + q * n;
    const __m256d c = _mm256_set1_pd(point[q]);
    for (std::size_t i = 0; i < vec_end; i += 4) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(col + i), c);
      _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(diff, diff, _mm256_loadu_pd(dst + i)));
    }
    for (std::size_t i = vec_end; i < n; ++i) {
      const double diff = col[i] - point[q];
      dst[i] += diff * diff;
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t unrolled_end = n & ~std::size_t{7};
  const std::size_t vec_end = n & ~std::size_t{3};
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i < unrolled_end; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i < vec_end; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

double sum(std::span<const double> a) {
  const std::size_t n = a.size();
  const std::size_t vec_end = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i < vec_end; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a.data() + i));
  double res = hsum(acc);
  for (; i < n; ++i) res += a[i];
  return res;
}

}  // namespace spcm::kernels::avx2
