#include "pblab/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#define PBLAB_AVX2 __attribute__((target("avx2,fma")))

namespace pblab::kernels::avx2 {

namespace {

PBLAB_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

PBLAB_AVX2 inline void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

}  // namespace

PBLAB_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

PBLAB_AVX2 void convolve(const double* a, std::size_t na, const double* b, std::size_t nb,
                         double* out) {
  if (na == 0 || nb == 0) return;
  std::fill(out, out + na + nb - 1, 0.0);
  for (std::size_t i = 0; i < na; ++i) axpy(a[i], b, out + i, nb);
}

PBLAB_AVX2 void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x,
                       double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(m + r * cols, x, cols);
}

PBLAB_AVX2 void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols,
                       double* y) {
  std::fill(y, y + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], m + r * cols, y, cols);
}

PBLAB_AVX2 double l1_distance(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

PBLAB_AVX2 double positive_part_mean(const double* w, std::size_t n, double level) {
  const __m256d vlevel = _mm256_set1_pd(level);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d k = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gap = _mm256_max_pd(_mm256_sub_pd(vlevel, k), zero);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), gap, acc);
    k = _mm256_add_pd(k, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double gap = level - static_cast<double>(i);
    if (gap > 0.0) s = std::fma(w[i], gap, s);
  }
  return s;
}

}  // namespace pblab::kernels::avx2

#else

namespace pblab::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out) {
  scalar::convolve(a, na, b, nb, out);
}
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  scalar::matvec(m, rows, cols, x, y);
}
void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y) {
  scalar::vecmat(x, m, rows, cols, y);
}
double l1_distance(const double* a, const double* b, std::size_t n) {
  return scalar::l1_distance(a, b, n);
}
double positive_part_mean(const double* w, std::size_t n, double level) {
  return scalar::positive_part_mean(w, n, level);
}
}  // namespace pblab::kernels::avx2

#endif
