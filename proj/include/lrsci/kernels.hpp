#pragma once

#include <cstddef>
#include <string_view>

namespace lrsci::kernels {

/// Vector backends. The scalar kernels are the reference semantics; the
/// SIMD variants must agree with them to rounding (FMA contraction and
/// reduction order are the only sources of difference, covered by the
/// equivalence tests).
enum class Isa { scalar, avx2, neon };

/// Backend selected at startup: best supported ISA, unless the
/// LRSCI_SIMD environment variable (scalar|avx2|neon) overrides it.
Isa active_isa();

/// Forces a backend (tests). Throws InvalidArgument if unsupported here.
void set_isa(Isa isa);

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

struct Table {
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // dst[i] = a[i] * b[i]
  void (*hadamard)(double *dst, const double *a, const double *b,
                   std::size_t n);
  // dst[i] += a[i] * b[i]
  void (*hadamard_add)(double *dst, const double *a, const double *b,
                       std::size_t n);
  double (*dot)(const double *a, const double *b, std::size_t n);
  double (*sum)(const double *x, std::size_t n);
  double (*sum_sq)(const double *x, std::size_t n);
  void (*scale)(double alpha, double *x, std::size_t n);
  // dst[i] = sign(src[i]) * max(|src[i]| - tau, 0)
  void (*soft_threshold)(double *dst, const double *src, double tau,
                         std::size_t n);
};

/// Implementation table for one backend (throws if unsupported). Tests use
/// this to compare backends directly; library code goes through the
/// convenience wrappers below, which use the active backend.
const Table &table(Isa isa);

inline const Table &active_table() { return table(active_isa()); }

inline void axpy(double alpha, const double *x, double *y, std::size_t n) {
  active_table().axpy(alpha, x, y, n);
}
inline void hadamard(double *dst, const double *a, const double *b,
                     std::size_t n) {
  active_table().hadamard(dst, a, b, n);
}
inline void hadamard_add(double *dst, const double *a, const double *b,
                         std::size_t n) {
  active_table().hadamard_add(dst, a, b, n);
}
inline double dot(const double *a, const double *b, std::size_t n) {
  return active_table().dot(a, b, n);
}
inline double sum(const double *x, std::size_t n) {
  return active_table().sum(x, n);
}
inline double sum_sq(const double *x, std::size_t n) {
  return active_table().sum_sq(x, n);
}
inline void scale(double alpha, double *x, std::size_t n) {
  active_table().scale(alpha, x, n);
}
inline void soft_threshold(double *dst, const double *src, double tau,
                           std::size_t n) {
  active_table().soft_threshold(dst, src, tau, n);
}

namespace detail {
const Table &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const Table &avx2_table();
bool avx2_available();
#endif
#if defined(__aarch64__)
const Table &neon_table();
#endif
} // namespace detail

} // namespace lrsci::kernels
