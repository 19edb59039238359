#pragma once

#include <cstdint>
#include <vector>

#include "lrsci/types.hpp"

namespace lrsci::data {

/// Synthetic scene parameters. `rank` is the exact spectral rank of the
/// generated cube; `smoothness` is the Gaussian low-pass sigma applied to
/// the coefficient maps (0 disables smoothing).
struct SynthSpec {
  int height = 32;
  int width = 32;
  int bands = 8;
  int rank = 3;
  double smoothness = 4.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  HsiCube cube;      // values in [0, 1], exactly rank-k
  MatrixXd basis;    // B x rank, orthonormal, ground truth
  MatrixXd subspace; // HW x rank, ground truth
};

/// Draws an orthonormal spectral basis (QR of a Gaussian matrix whose
/// first column is flat, so the leading spectrum is a DC component),
/// smooth nonnegative coefficient maps, and composes a nonnegative cube
/// rescaled to peak 1. The construction keeps the composition nonnegative
/// outright, so the safety clip at 0 never perturbs the rank.
SynthResult synth_hsi(const SynthSpec &spec);

/// Two-level random mask: value `hi` with probability `density`, else
/// `lo`. Defaults give the standard 0/1 coded aperture with 50% mean.
RowMajorMatrixXd random_mask(int height, int width, std::uint64_t seed,
                             double lo = 0.0, double hi = 1.0,
                             double density = 0.5);

/// Cube-wide peak signal-to-noise ratio in dB, capped at 100 dB when the
/// inputs coincide.
double psnr(const HsiCube &x, const HsiCube &ref, double peak = 1.0);

/// PSNR of each band separately (same cap).
std::vector<double> psnr_per_band(const HsiCube &x, const HsiCube &ref,
                                  double peak = 1.0);

/// Mean structural similarity over bands. Standard Gaussian window
/// (11x11, sigma 1.5, clamped to odd min(11, H, W)), stability constants
/// (0.01 peak)^2 and (0.03 peak)^2, statistics over the valid region.
double ssim(const HsiCube &x, const HsiCube &ref, double peak = 1.0);

/// Random square crops with uniformly drawn top-left corners,
/// deterministic per seed.
std::vector<HsiCube> crop_sampler(const HsiCube &cube, int size, int count,
                                  std::uint64_t seed);

/// Crop with an explicit corner (shared by crop_sampler and training).
HsiCube crop(const HsiCube &cube, int top, int left, int size);

} // namespace lrsci::data
