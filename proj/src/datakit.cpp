#include "lrsci/datakit.hpp"

#include <algorithm>
#include <cmath>

#include "lrsci/lowrank.hpp"
#include "lrsci/rng.hpp"

namespace lrsci::data {

void SynthSpec::validate() const {
  if (height < 1 || width < 1 || bands < 1)
    throw InvalidArgument("SynthSpec: dims must be >= 1");
  if (rank < 1 || rank > bands)
    throw InvalidArgument("SynthSpec: rank must be in [1, B]");
  if (smoothness < 0.0)
    throw InvalidArgument("SynthSpec: smoothness must be >= 0");
}

namespace {

// separable Gaussian blur with reflect padding
RowMajorMatrixXd gauss_blur(const RowMajorMatrixXd &img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  VectorXd ker(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    ker[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  ker /= ker.sum();

  const Eigen::Index h = img.rows(), w = img.cols();
  auto reflect = [](Eigen::Index i, Eigen::Index n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  RowMajorMatrixXd tmp(h, w), out(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += ker[i + radius] * img(r, reflect(c + i, w));
      tmp(r, c) = acc;
    }
  for (Eigen::Index c = 0; c < w; ++c)
    for (Eigen::Index r = 0; r < h; ++r) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += ker[i + radius] * tmp(reflect(r + i, h), c);
      out(r, c) = acc;
    }
  return out;
}

} // namespace

SynthResult synth_hsi(const SynthSpec &spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int b = spec.bands, k = spec.rank;
  const Eigen::Index hw =
      static_cast<Eigen::Index>(spec.height) * spec.width;

  // orthonormal basis; flat first column gives a positive DC spectrum
  MatrixXd g(b, k);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  g.col(0).setOnes();
  MatrixXd basis = lowrank::qr_orthonormalize(g);

  // smooth coefficient maps normalized to [0, 1]
  MatrixXd maps(hw, k);
  for (int j = 0; j < k; ++j) {
    RowMajorMatrixXd f(spec.height, spec.width);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.normal();
    f = gauss_blur(f, spec.smoothness);
    const double lo = f.minCoeff(), hi = f.maxCoeff();
    f = (f.array() - lo) / std::max(hi - lo, 1e-12);
    for (int r = 0; r < spec.height; ++r)
      for (int c = 0; c < spec.width; ++c)
        maps(static_cast<Eigen::Index>(r) * spec.width + c, j) = f(r, c);
  }

  // weight the DC map so the composition stays nonnegative:
  // X(p,:) = A(p,0)/sqrt(B) * 1 + sum_j>=1 A(p,j) E(:,j) and
  // |sum_j>=1 ...| <= sqrt(k-1) * max_p ||A(p,1:)||
  MatrixXd subspace = maps;
  double tail = 0.0;
  if (k > 1)
    tail = maps.rightCols(k - 1).rowwise().norm().maxCoeff();
  const double dc_gain =
      std::sqrt(static_cast<double>(b)) * (std::sqrt(std::max(k - 1, 1)) * tail + 0.1);
  subspace.col(0) = dc_gain * (1.0 + maps.col(0).array());

  HsiCube cube =
      lowrank::compose(subspace, basis, spec.height, spec.width);
  // safety clip; a no-op by construction
  cube.vec() = cube.vec().cwiseMax(0.0);

  const double peak = cube.vec().maxCoeff();
  cube.vec() /= peak;
  subspace /= peak;

  return SynthResult{std::move(cube), std::move(basis), std::move(subspace)};
}

RowMajorMatrixXd random_mask(int height, int width, std::uint64_t seed,
                             double lo, double hi, double density) {
  if (height < 1 || width < 1)
    throw InvalidArgument("random_mask: dims must be >= 1");
  if (density < 0.0 || density > 1.0)
    throw InvalidArgument("random_mask: density must be in [0, 1]");
  Rng rng(seed);
  RowMajorMatrixXd m(height, width);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform() < density ? hi : lo;
  return m;
}

namespace {

void require_same_shape(const HsiCube &x, const HsiCube &ref) {
  if (x.height() != ref.height() || x.width() != ref.width() ||
      x.bands() != ref.bands())
    throw InvalidArgument("metric inputs must have identical shapes");
}

constexpr double kPsnrCapDb = 100.0;

double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

} // namespace

double psnr(const HsiCube &x, const HsiCube &ref, double peak) {
  require_same_shape(x, ref);
  const double mse = (x.vec() - ref.vec()).squaredNorm() /
                     static_cast<double>(x.size());
  return psnr_from_mse(mse, peak);
}

std::vector<double> psnr_per_band(const HsiCube &x, const HsiCube &ref,
                                  double peak) {
  require_same_shape(x, ref);
  std::vector<double> out(x.bands());
  for (int b = 0; b < x.bands(); ++b) {
    const double mse = (x.band(b) - ref.band(b)).squaredNorm() /
                       static_cast<double>(x.spatial_size());
    out[b] = psnr_from_mse(mse, peak);
  }
  return out;
}

double ssim(const HsiCube &x, const HsiCube &ref, double peak) {
  require_same_shape(x, ref);
  const int h = x.height(), w = x.width();

  int win = std::min({11, h, w});
  if (win % 2 == 0) --win;
  const int radius = win / 2;
  const double sigma = 1.5;
  VectorXd ker(win);
  for (int i = -radius; i <= radius; ++i)
    ker[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  ker /= ker.sum();

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  // separable Gaussian filter, valid region only
  auto filt = [&](const RowMajorMatrixXd &img) {
    const Eigen::Index fh = img.rows(), fw = img.cols() - 2 * radius;
    RowMajorMatrixXd tmp(fh, fw);
    for (Eigen::Index r = 0; r < fh; ++r)
      for (Eigen::Index c = 0; c < fw; ++c) {
        double acc = 0.0;
        for (int i = 0; i < win; ++i) acc += ker[i] * img(r, c + i);
        tmp(r, c) = acc;
      }
    RowMajorMatrixXd out(fh - 2 * radius, fw);
    for (Eigen::Index c = 0; c < fw; ++c)
      for (Eigen::Index r = 0; r + 2 * radius < fh; ++r) {
        double acc = 0.0;
        for (int i = 0; i < win; ++i) acc += ker[i] * tmp(r + i, c);
        out(r, c) = acc;
      }
    return out;
  };

  double total = 0.0;
  for (int b = 0; b < x.bands(); ++b) {
    const RowMajorMatrixXd xb = x.band(b);
    const RowMajorMatrixXd rb = ref.band(b);
    const RowMajorMatrixXd mx = filt(xb);
    const RowMajorMatrixXd mr = filt(rb);
    const RowMajorMatrixXd sxx =
        filt(xb.cwiseProduct(xb)) - mx.cwiseProduct(mx);
    const RowMajorMatrixXd srr =
        filt(rb.cwiseProduct(rb)) - mr.cwiseProduct(mr);
    const RowMajorMatrixXd sxr =
        filt(xb.cwiseProduct(rb)) - mx.cwiseProduct(mr);

    const auto num = (2.0 * mx.array() * mr.array() + c1) *
                     (2.0 * sxr.array() + c2);
    const auto den = (mx.array().square() + mr.array().square() + c1) *
                     (sxx.array() + srr.array() + c2);
    total += (num / den).mean();
  }
  return total / x.bands();
}

HsiCube crop(const HsiCube &cube, int top, int left, int size) {
  if (size < 1 || top < 0 || left < 0 || top + size > cube.height() ||
      left + size > cube.width())
    throw InvalidArgument("crop: window out of bounds");
  HsiCube out(size, size, cube.bands());
  for (int b = 0; b < cube.bands(); ++b)
    out.band(b) = cube.band(b).block(top, left, size, size);
  return out;
}

std::vector<HsiCube> crop_sampler(const HsiCube &cube, int size, int count,
                                  std::uint64_t seed) {
  if (size > std::min(cube.height(), cube.width()))
    throw InvalidArgument("crop_sampler: size exceeds cube dims");
  if (count < 0) throw InvalidArgument("crop_sampler: count must be >= 0");
  Rng rng(seed);
  std::vector<HsiCube> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int top =
        static_cast<int>(rng.uniform_int(0, cube.height() - size));
    const int left =
        static_cast<int>(rng.uniform_int(0, cube.width() - size));
    out.push_back(crop(cube, top, left, size));
  }
  return out;
}

} // namespace lrsci::data
