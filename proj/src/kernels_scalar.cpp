#include <cmath>
#include <cstddef>

#include "lrsci/kernels.hpp"

namespace lrsci::kernels::detail {
namespace {

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard(double *dst, const double *a, const double *b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void hadamard_add(double *dst, const double *a, const double *b,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

double dot(const double *a, const double *b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double *x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq(const double *x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void scale(double alpha, double *x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void soft_threshold(double *dst, const double *src, double tau,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = src[i];
    const double m = std::fabs(v) - tau;
    dst[i] = m > 0.0 ? std::copysign(m, v) : 0.0;
  }
}

} // namespace

const Table &scalar_table() {
  static const Table t{axpy, hadamard, hadamard_add, dot,
                       sum,  sum_sq,   scale,        soft_threshold};
  return t;
}

} // namespace lrsci::kernels::detail
