#include <atomic>
#include <cstdlib>
#include <string>

#include "lrsci/errors.hpp"
#include "lrsci/kernels.hpp"

namespace lrsci::kernels {

namespace {

Isa detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
  if (detail::avx2_available()) return Isa::avx2;
#elif defined(__aarch64__)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Isa initial_isa() {
  if (const char *env = std::getenv("LRSCI_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && isa_supported(Isa::neon)) return Isa::neon;
  }
  return detect_best();
}

std::atomic<Isa> &active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

} // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
  case Isa::scalar:
    return true;
  case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
    return detail::avx2_available();
#else
    return false;
#endif
  case Isa::neon:
#if defined(__aarch64__)
    return true;
#else
    return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
  case Isa::scalar:
    return "scalar";
  case Isa::avx2:
    return "avx2";
  case Isa::neon:
    return "neon";
  }
  return "unknown";
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw InvalidArgument("kernel backend not supported on this CPU: " +
                          std::string(isa_name(isa)));
  active().store(isa, std::memory_order_relaxed);
}

const Table &table(Isa isa) {
  if (!isa_supported(isa))
    throw InvalidArgument("kernel backend not supported on this CPU: " +
                          std::string(isa_name(isa)));
  switch (isa) {
  case Isa::scalar:
    return detail::scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
  case Isa::avx2:
    return detail::avx2_table();
#endif
#if defined(__aarch64__)
  case Isa::neon:
    return detail::neon_table();
#endif
  default:
    return detail::scalar_table();
  }
}

} // namespace lrsci::kernels
