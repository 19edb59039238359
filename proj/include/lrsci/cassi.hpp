#pragma once

#include <cstdint>
#include <vector>

#include "lrsci/types.hpp"

namespace lrsci::cassi {

/// Per-band horizontal offsets [0, step, 2*step, ...], length `bands`.
std::vector<int> make_shift_schedule(int bands, int step);

/// Detector image: every band is mask-modulated, shifted right by its
/// offset and accumulated, Y(h, w+d_b) += M(h,w) * X_b(h,w).
/// Output width is W + step*(B-1).
Measurement forward(const HsiCube &x, const SensingSpec &spec);

/// Exact linear adjoint of forward under the canonical vectorization:
/// Z_b(h, w) = M(h, w) * Y(h, w + d_b).
HsiCube adjoint(const Measurement &y, const SensingSpec &spec);

/// Dense sensing matrix (HW' x HWB) built by explicit index arithmetic,
/// independent of the scatter loop in forward(). Oracle for tiny
/// instances only: refuses HWB > 10000.
MatrixXd build_explicit_sensing_matrix(const SensingSpec &spec);

/// Additive zero-mean Gaussian noise of standard deviation sigma,
/// deterministic per seed. Records sigma in the result metadata.
Measurement add_noise(const Measurement &y, double sigma, std::uint64_t seed);

} // namespace lrsci::cassi
