#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lrsci/errors.hpp"

namespace lrsci {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMajorMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Hyperspectral cube of shape H x W x B.
///
/// Flat storage follows the canonical vectorization used throughout:
/// band-major blocks, each band spatial row-major, i.e. element (h, w, b)
/// lives at index b*H*W + h*W + w. Under this layout as_matrix() is a
/// zero-copy HW x B matricization (band b = column b) and data() is the
/// canonical vector the sensing matrix acts on.
class HsiCube {
public:
  HsiCube() = default;

  HsiCube(int height, int width, int bands)
      : h_(height), w_(width), b_(bands) {
    if (height < 1 || width < 1 || bands < 1)
      throw InvalidArgument("HsiCube: all dims must be >= 1");
    data_ = VectorXd::Zero(static_cast<Eigen::Index>(height) * width * bands);
  }

  /// Builds a cube from its HW x B matricization.
  static HsiCube from_matrix(int height, int width, const MatrixXd &m) {
    if (m.rows() != static_cast<Eigen::Index>(height) * width)
      throw InvalidArgument("HsiCube::from_matrix: row count != H*W");
    HsiCube c(height, width, static_cast<int>(m.cols()));
    c.as_matrix() = m;
    return c;
  }

  int height() const { return h_; }
  int width() const { return w_; }
  int bands() const { return b_; }
  Eigen::Index spatial_size() const {
    return static_cast<Eigen::Index>(h_) * w_;
  }
  Eigen::Index size() const { return data_.size(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  VectorXd &vec() { return data_; }
  const VectorXd &vec() const { return data_; }

  double &at(int h, int w, int b) {
    return data_[static_cast<Eigen::Index>(b) * h_ * w_ +
                 static_cast<Eigen::Index>(h) * w_ + w];
  }
  double at(int h, int w, int b) const {
    return data_[static_cast<Eigen::Index>(b) * h_ * w_ +
                 static_cast<Eigen::Index>(h) * w_ + w];
  }

  /// HW x B view sharing storage (column b = band b, spatial row-major).
  Eigen::Map<MatrixXd> as_matrix() {
    return {data_.data(), spatial_size(), b_};
  }
  Eigen::Map<const MatrixXd> as_matrix() const {
    return {data_.data(), spatial_size(), b_};
  }

  /// H x W view of one band.
  Eigen::Map<RowMajorMatrixXd> band(int b) {
    return {data_.data() + static_cast<Eigen::Index>(b) * h_ * w_, h_, w_};
  }
  Eigen::Map<const RowMajorMatrixXd> band(int b) const {
    return {data_.data() + static_cast<Eigen::Index>(b) * h_ * w_, h_, w_};
  }

  bool all_finite() const { return data_.allFinite(); }

private:
  int h_ = 0, w_ = 0, b_ = 0;
  VectorXd data_;
};

/// Coded aperture plus dispersion schedule; defines the sensing operator.
struct SensingSpec {
  RowMajorMatrixXd mask; // H x W transmittances in [0, 1]
  int step = 0;          // horizontal dispersion step per band
  std::vector<int> offsets;

  static SensingSpec make(RowMajorMatrixXd mask, int bands, int step) {
    if (bands < 1) throw InvalidArgument("SensingSpec: bands must be >= 1");
    if (step < 0) throw InvalidArgument("SensingSpec: step must be >= 0");
    if (mask.rows() < 1 || mask.cols() < 1)
      throw InvalidArgument("SensingSpec: empty mask");
    SensingSpec s;
    s.mask = std::move(mask);
    s.step = step;
    s.offsets.resize(bands);
    for (int b = 0; b < bands; ++b) s.offsets[b] = step * b;
    return s;
  }

  int height() const { return static_cast<int>(mask.rows()); }
  int width() const { return static_cast<int>(mask.cols()); }
  int bands() const { return static_cast<int>(offsets.size()); }
  int measurement_width() const { return width() + offsets.back(); }

  void require_cube(const HsiCube &x) const {
    if (x.height() != height() || x.width() != width())
      throw InvalidArgument("mask shape does not match cube spatial shape");
    if (x.bands() != bands())
      throw InvalidArgument("offsets length does not match cube band count");
  }
};

/// 2D compressed measurement, H x W' with W' = W + step*(B-1).
struct Measurement {
  RowMajorMatrixXd data;
  double noise_sigma = 0.0;

  int height() const { return static_cast<int>(data.rows()); }
  int width() const { return static_cast<int>(data.cols()); }

  void require_spec(const SensingSpec &spec) const {
    if (height() != spec.height() || width() != spec.measurement_width())
      throw InvalidArgument("measurement shape does not match sensing spec");
  }
};

} // namespace lrsci
