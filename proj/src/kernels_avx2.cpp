// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and is only entered after a runtime CPU check.

#if defined(__x86_64__) || defined(_M_X64)

#include <cmath>
#include <cstddef>
#include <immintrin.h>

#include "lrsci/kernels.hpp"

namespace lrsci::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard(double *dst, const double *a, const double *b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void hadamard_add(double *dst, const double *a, const double *b,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vd = _mm256_loadu_pd(dst + i);
    vd = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), vd);
    _mm256_storeu_pd(dst + i, vd);
  }
  for (; i < n; ++i) dst[i] += a[i] * b[i];
}

double dot(const double *a, const double *b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sum(const double *x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum_sq(const double *x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void scale(double alpha, double *x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void soft_threshold(double *dst, const double *src, double tau,
                    std::size_t n) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d signbit = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(src + i);
    const __m256d sgn = _mm256_and_pd(v, signbit);
    const __m256d mag =
        _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(signbit, v), vtau), zero);
    _mm256_storeu_pd(dst + i, _mm256_or_pd(mag, sgn));
  }
  for (; i < n; ++i) {
    const double v = src[i];
    const double m = std::fabs(v) - tau;
    dst[i] = m > 0.0 ? std::copysign(m, v) : 0.0;
  }
}

} // namespace

const Table &avx2_table() {
  static const Table t{axpy, hadamard, hadamard_add, dot,
                       sum,  sum_sq,   scale,        soft_threshold};
  return t;
}

bool avx2_available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

} // namespace lrsci::kernels::detail

#endif // x86_64
