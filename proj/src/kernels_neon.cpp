// NEON kernel variants for aarch64 builds.

#if defined(__aarch64__)

#include <arm_neon.h>
#include <cmath>
#include <cstddef>

#include "lrsci/kernels.hpp"

namespace lrsci::kernels::detail {
namespace {

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard(double *dst, const double *a, const double *b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void hadamard_add(double *dst, const double *a, const double *b,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vd = vld1q_f64(dst + i);
    vd = vfmaq_f64(vd, vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(dst + i, vd);
  }
  for (; i < n; ++i) dst[i] += a[i] * b[i];
}

double dot(const double *a, const double *b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sum(const double *x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum_sq(const double *x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void scale(double alpha, double *x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void soft_threshold(double *dst, const double *src, double tau,
                    std::size_t n) {
  const float64x2_t vtau = vdupq_n_f64(tau);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(src + i);
    const float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(v), vtau), zero);
    const uint64x2_t sgn =
        vandq_u64(vreinterpretq_u64_f64(v), vdupq_n_u64(0x8000000000000000ull));
    vst1q_f64(dst + i,
              vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(mag), sgn)));
  }
  for (; i < n; ++i) {
    const double v = src[i];
    const double m = std::fabs(v) - tau;
    dst[i] = m > 0.0 ? std::copysign(m, v) : 0.0;
  }
}

} // namespace

const Table &neon_table() {
  static const Table t{axpy, hadamard, hadamard_add, dot,
                       sum,  sum_sq,   scale,        soft_threshold};
  return t;
}

} // namespace lrsci::kernels::detail

#endif // __aarch64__
