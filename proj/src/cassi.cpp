#include "lrsci/cassi.hpp"

#include "lrsci/kernels.hpp"
#include "lrsci/rng.hpp"

namespace lrsci::cassi {

std::vector<int> make_shift_schedule(int bands, int step) {
  if (bands < 1) throw InvalidArgument("make_shift_schedule: bands must be >= 1");
  if (step < 0) throw InvalidArgument("make_shift_schedule: step must be >= 0");
  std::vector<int> offsets(bands);
  for (int b = 0; b < bands; ++b) offsets[b] = step * b;
  return offsets;
}

Measurement forward(const HsiCube &x, const SensingSpec &spec) {
  spec.require_cube(x);
  const int h = spec.height(), w = spec.width(), bands = spec.bands();
  const int wp = spec.measurement_width();

  Measurement y;
  y.data = RowMajorMatrixXd::Zero(h, wp);
  for (int b = 0; b < bands; ++b) {
    const int d = spec.offsets[b];
    const auto plane = x.band(b);
    for (int r = 0; r < h; ++r) {
      kernels::hadamard_add(y.data.row(r).data() + d,
                            spec.mask.row(r).data(), plane.row(r).data(),
                            static_cast<std::size_t>(w));
    }
  }
  return y;
}

HsiCube adjoint(const Measurement &y, const SensingSpec &spec) {
  y.require_spec(spec);
  const int h = spec.height(), w = spec.width(), bands = spec.bands();

  HsiCube z(h, w, bands);
  for (int b = 0; b < bands; ++b) {
    const int d = spec.offsets[b];
    auto plane = z.band(b);
    for (int r = 0; r < h; ++r) {
      kernels::hadamard(plane.row(r).data(), spec.mask.row(r).data(),
                        y.data.row(r).data() + d,
                        static_cast<std::size_t>(w));
    }
  }
  return z;
}

MatrixXd build_explicit_sensing_matrix(const SensingSpec &spec) {
  const int h = spec.height(), w = spec.width(), bands = spec.bands();
  const Eigen::Index hwb = static_cast<Eigen::Index>(h) * w * bands;
  if (hwb > 10000)
    throw ResourceLimit("explicit sensing matrix capped at HWB <= 10000");

  const int wp = spec.measurement_width();
  // row r = hh*W' + ww' (measurement, spatial row-major);
  // col c = b*HW + hh*W + ww (canonical cube vectorization)
  MatrixXd phi = MatrixXd::Zero(static_cast<Eigen::Index>(h) * wp, hwb);
  for (int b = 0; b < bands; ++b) {
    const int d = spec.offsets[b];
    for (int hh = 0; hh < h; ++hh) {
      for (int ww = 0; ww < w; ++ww) {
        const Eigen::Index row = static_cast<Eigen::Index>(hh) * wp + ww + d;
        const Eigen::Index col =
            static_cast<Eigen::Index>(b) * h * w + static_cast<Eigen::Index>(hh) * w + ww;
        phi(row, col) = spec.mask(hh, ww);
      }
    }
  }
  return phi;
}

Measurement add_noise(const Measurement &y, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidArgument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return y;
  Measurement out = y;
  out.noise_sigma = sigma;
  Rng rng(seed);
  double *p = out.data.data();
  const Eigen::Index n = out.data.size();
  for (Eigen::Index i = 0; i < n; ++i) p[i] += rng.normal(0.0, sigma);
  return out;
}

} // namespace lrsci::cassi
