#include "lrsci/net/layers.hpp"

#include <cmath>

#include "lrsci/kernels.hpp"
#include "lrsci/lowrank.hpp"

namespace lrsci::net {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

void fan_in_init(Parameter &p, double fan_in, Rng &rng) {
  const double bound = 1.0 / std::sqrt(std::max(fan_in, 1.0));
  for (Eigen::Index i = 0; i < p.value.size(); ++i)
    p.value[i] = rng.uniform(-bound, bound);
}

Eigen::Map<MatrixXd> map2d(Parameter &p, Eigen::Index offset,
                           Eigen::Index rows, Eigen::Index cols) {
  return {p.value.data() + offset, rows, cols};
}
Eigen::Map<const MatrixXd> cmap2d(const Parameter &p, Eigen::Index offset,
                                  Eigen::Index rows, Eigen::Index cols) {
  return {p.value.data() + offset, rows, cols};
}
Eigen::Map<MatrixXd> gmap2d(Parameter &p, Eigen::Index offset,
                            Eigen::Index rows, Eigen::Index cols) {
  return {p.grad.data() + offset, rows, cols};
}

// dst(r, c) += coeff * src(r + dy, c + dx) over the in-range window
void shifted_axpy(Eigen::Map<RowMajorMatrixXd> dst,
                  Eigen::Map<const RowMajorMatrixXd> src, int dy, int dx,
                  double coeff) {
  const int h = static_cast<int>(dst.rows());
  const int w = static_cast<int>(dst.cols());
  const int r0 = std::max(0, -dy), r1 = std::min(h, h - dy);
  const int c0 = std::max(0, -dx), c1 = std::min(w, w - dx);
  if (r0 >= r1 || c0 >= c1) return;
  const std::size_t n = static_cast<std::size_t>(c1 - c0);
  for (int r = r0; r < r1; ++r)
    kernels::axpy(coeff, src.row(r + dy).data() + (c0 + dx),
                  dst.row(r).data() + c0, n);
}

// sum over the in-range window of a(r, c) * b(r + dy, c + dx)
double shifted_dot(Eigen::Map<const RowMajorMatrixXd> a,
                   Eigen::Map<const RowMajorMatrixXd> b, int dy, int dx) {
  const int h = static_cast<int>(a.rows());
  const int w = static_cast<int>(a.cols());
  const int r0 = std::max(0, -dy), r1 = std::min(h, h - dy);
  const int c0 = std::max(0, -dx), c1 = std::min(w, w - dx);
  if (r0 >= r1 || c0 >= c1) return 0.0;
  const std::size_t n = static_cast<std::size_t>(c1 - c0);
  double acc = 0.0;
  for (int r = r0; r < r1; ++r)
    acc += kernels::dot(a.row(r).data() + c0, b.row(r + dy).data() + (c0 + dx),
                        n);
  return acc;
}

Eigen::Map<RowMajorMatrixXd> plane(FeatureMap &f, int c) {
  return {f.m.col(c).data(), f.height, f.width};
}
Eigen::Map<const RowMajorMatrixXd> plane(const FeatureMap &f, int c) {
  return {f.m.col(c).data(), f.height, f.width};
}

} // namespace

Parameter &ParamStore::add(std::string name, std::vector<int> shape) {
  Eigen::Index n = 1;
  for (int d : shape) {
    if (d < 1) throw InvalidArgument("Parameter shape entries must be >= 1");
    n *= d;
  }
  for (const auto &p : params_)
    if (p->name == name)
      throw InvalidArgument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->shape = std::move(shape);
  p->value = VectorXd::Zero(n);
  p->grad = VectorXd::Zero(n);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter *ParamStore::find(const std::string &name) {
  for (const auto &p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

Eigen::Index ParamStore::total_size() const {
  Eigen::Index n = 0;
  for (const auto &p : params_) n += p->size();
  return n;
}

void ParamStore::zero_grad() {
  for (const auto &p : params_) p->grad.setZero();
}

VectorXd ParamStore::gather_values() const {
  VectorXd flat(total_size());
  Eigen::Index o = 0;
  for (const auto &p : params_) {
    flat.segment(o, p->size()) = p->value;
    o += p->size();
  }
  return flat;
}

VectorXd ParamStore::gather_grads() const {
  VectorXd flat(total_size());
  Eigen::Index o = 0;
  for (const auto &p : params_) {
    flat.segment(o, p->size()) = p->grad;
    o += p->size();
  }
  return flat;
}

void ParamStore::scatter_values(const VectorXd &flat) {
  if (flat.size() != total_size())
    throw InvalidArgument("scatter_values: size mismatch");
  Eigen::Index o = 0;
  for (const auto &p : params_) {
    p->value = flat.segment(o, p->size());
    o += p->size();
  }
}

MatrixXd gelu(const MatrixXd &x) {
  MatrixXd y(x.rows(), x.cols());
  const double *px = x.data();
  double *py = y.data();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    py[i] = 0.5 * px[i] * (1.0 + std::erf(px[i] * kInvSqrt2));
  return y;
}

MatrixXd gelu_backward(const MatrixXd &x, const MatrixXd &gout) {
  MatrixXd g(x.rows(), x.cols());
  const double *px = x.data();
  const double *pg = gout.data();
  double *pd = g.data();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = px[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    pd[i] = pg[i] * (cdf + v * pdf);
  }
  return g;
}

// ---------------------------------------------------------------------------

Linear::Linear(ParamStore &store, const std::string &name, int cin, int cout,
               Rng &rng, bool zero_init)
    : cin_(cin), cout_(cout) {
  w_ = &store.add(name + ".weight", {cout, cin});
  b_ = &store.add(name + ".bias", {cout});
  if (!zero_init) {
    fan_in_init(*w_, cin, rng);
    fan_in_init(*b_, cin, rng);
  }
}

MatrixXd Linear::forward(const MatrixXd &x, Ctx *ctx) const {
  if (x.cols() != cin_) throw InvalidArgument("Linear: channel mismatch");
  if (ctx) ctx->x = x;
  MatrixXd out = x * cmap2d(*w_, 0, cout_, cin_).transpose();
  out.rowwise() += b_->value.transpose();
  return out;
}

MatrixXd Linear::backward(const Ctx &ctx, const MatrixXd &gout) const {
  gmap2d(*w_, 0, cout_, cin_).noalias() += gout.transpose() * ctx.x;
  b_->grad += gout.colwise().sum().transpose();
  return gout * cmap2d(*w_, 0, cout_, cin_);
}

// ---------------------------------------------------------------------------

Conv1d::Conv1d(ParamStore &store, const std::string &name, int cin, int cout,
               int ksize, Rng &rng, bool zero_init)
    : cin_(cin), cout_(cout), ksize_(ksize) {
  if (ksize < 1 || ksize % 2 == 0)
    throw InvalidArgument("Conv1d: kernel size must be odd");
  w_ = &store.add(name + ".weight", {cout, cin, ksize});
  b_ = &store.add(name + ".bias", {cout});
  if (!zero_init) {
    fan_in_init(*w_, static_cast<double>(cin) * ksize, rng);
    fan_in_init(*b_, static_cast<double>(cin) * ksize, rng);
  }
}

MatrixXd Conv1d::forward(const MatrixXd &x, Ctx *ctx) const {
  if (x.cols() != cin_) throw InvalidArgument("Conv1d: channel mismatch");
  if (ctx) ctx->x = x;
  const Eigen::Index n = x.rows();
  const int radius = ksize_ / 2;
  MatrixXd out = MatrixXd::Zero(n, cout_);
  out.rowwise() += b_->value.transpose();
  for (int t = 0; t < ksize_; ++t) {
    const int shift = t - radius; // input row = output row + shift
    const Eigen::Index r0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index r1 = std::min<Eigen::Index>(n, n - shift);
    if (r0 >= r1) continue;
    const auto wt =
        cmap2d(*w_, static_cast<Eigen::Index>(t) * cout_ * cin_, cout_, cin_);
    out.middleRows(r0, r1 - r0).noalias() +=
        x.middleRows(r0 + shift, r1 - r0) * wt.transpose();
  }
  return out;
}

MatrixXd Conv1d::backward(const Ctx &ctx, const MatrixXd &gout) const {
  const Eigen::Index n = ctx.x.rows();
  const int radius = ksize_ / 2;
  MatrixXd gx = MatrixXd::Zero(n, cin_);
  b_->grad += gout.colwise().sum().transpose();
  for (int t = 0; t < ksize_; ++t) {
    const int shift = t - radius;
    const Eigen::Index r0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index r1 = std::min<Eigen::Index>(n, n - shift);
    if (r0 >= r1) continue;
    const Eigen::Index off = static_cast<Eigen::Index>(t) * cout_ * cin_;
    gmap2d(*w_, off, cout_, cin_).noalias() +=
        gout.middleRows(r0, r1 - r0).transpose() *
        ctx.x.middleRows(r0 + shift, r1 - r0);
    gx.middleRows(r0 + shift, r1 - r0).noalias() +=
        gout.middleRows(r0, r1 - r0) * cmap2d(*w_, off, cout_, cin_);
  }
  return gx;
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(ParamStore &store, const std::string &name, int cin, int cout,
               int ksize, int stride, Rng &rng, bool zero_init)
    : cin_(cin), cout_(cout), ksize_(ksize), stride_(stride) {
  if (ksize < 1 || ksize % 2 == 0)
    throw InvalidArgument("Conv2d: kernel size must be odd");
  if (stride != 1 && stride != 2)
    throw InvalidArgument("Conv2d: stride must be 1 or 2");
  w_ = &store.add(name + ".weight", {cout, cin, ksize, ksize});
  b_ = &store.add(name + ".bias", {cout});
  if (!zero_init) {
    fan_in_init(*w_, static_cast<double>(cin) * ksize * ksize, rng);
    fan_in_init(*b_, static_cast<double>(cin) * ksize * ksize, rng);
  }
}

FeatureMap Conv2d::forward(const FeatureMap &x, Ctx *ctx) const {
  if (x.channels != cin_) throw InvalidArgument("Conv2d: channel mismatch");
  if (ctx) ctx->x = x;
  const int radius = ksize_ / 2;

  if (stride_ == 1) {
    FeatureMap out(x.height, x.width, cout_);
    out.m.rowwise() += b_->value.transpose();
    for (int co = 0; co < cout_; ++co) {
      auto dst = plane(out, co);
      for (int ci = 0; ci < cin_; ++ci) {
        const auto src = plane(x, ci);
        for (int ky = 0; ky < ksize_; ++ky)
          for (int kx = 0; kx < ksize_; ++kx) {
            const Eigen::Index wi =
                ((static_cast<Eigen::Index>(ky) * ksize_ + kx) * cin_ + ci) *
                    cout_ +
                co;
            shifted_axpy(dst, src, ky - radius, kx - radius, w_->value[wi]);
          }
      }
    }
    return out;
  }

  // stride 2
  const int oh = (x.height + 1) / 2, ow = (x.width + 1) / 2;
  FeatureMap out(oh, ow, cout_);
  out.m.rowwise() += b_->value.transpose();
  for (int co = 0; co < cout_; ++co) {
    auto dst = plane(out, co);
    for (int ci = 0; ci < cin_; ++ci) {
      const auto src = plane(x, ci);
      for (int r = 0; r < oh; ++r)
        for (int c = 0; c < ow; ++c) {
          double acc = 0.0;
          for (int ky = 0; ky < ksize_; ++ky) {
            const int sy = 2 * r + ky - radius;
            if (sy < 0 || sy >= x.height) continue;
            for (int kx = 0; kx < ksize_; ++kx) {
              const int sx = 2 * c + kx - radius;
              if (sx < 0 || sx >= x.width) continue;
              const Eigen::Index wi =
                  ((static_cast<Eigen::Index>(ky) * ksize_ + kx) * cin_ + ci) *
                      cout_ +
                  co;
              acc += w_->value[wi] * src(sy, sx);
            }
          }
          dst(r, c) += acc;
        }
    }
  }
  return out;
}

FeatureMap Conv2d::backward(const Ctx &ctx, const FeatureMap &gout) const {
  const FeatureMap &x = ctx.x;
  const int radius = ksize_ / 2;
  FeatureMap gx(x.height, x.width, cin_);
  b_->grad += gout.m.colwise().sum().transpose();

  if (stride_ == 1) {
    for (int co = 0; co < cout_; ++co) {
      const auto g = plane(gout, co);
      for (int ci = 0; ci < cin_; ++ci) {
        const auto src = plane(x, ci);
        auto gsrc = plane(gx, ci);
        for (int ky = 0; ky < ksize_; ++ky)
          for (int kx = 0; kx < ksize_; ++kx) {
            const int dy = ky - radius, dx = kx - radius;
            const Eigen::Index wi =
                ((static_cast<Eigen::Index>(ky) * ksize_ + kx) * cin_ + ci) *
                    cout_ +
                co;
            w_->grad[wi] += shifted_dot(g, src, dy, dx);
            shifted_axpy(gsrc, g, -dy, -dx, w_->value[wi]);
          }
      }
    }
    return gx;
  }

  const int oh = gout.height, ow = gout.width;
  for (int co = 0; co < cout_; ++co) {
    const auto g = plane(gout, co);
    for (int ci = 0; ci < cin_; ++ci) {
      const auto src = plane(x, ci);
      auto gsrc = plane(gx, ci);
      for (int r = 0; r < oh; ++r)
        for (int c = 0; c < ow; ++c) {
          const double gv = g(r, c);
          if (gv == 0.0) continue;
          for (int ky = 0; ky < ksize_; ++ky) {
            const int sy = 2 * r + ky - radius;
            if (sy < 0 || sy >= x.height) continue;
            for (int kx = 0; kx < ksize_; ++kx) {
              const int sx = 2 * c + kx - radius;
              if (sx < 0 || sx >= x.width) continue;
              const Eigen::Index wi =
                  ((static_cast<Eigen::Index>(ky) * ksize_ + kx) * cin_ + ci) *
                      cout_ +
                  co;
              w_->grad[wi] += gv * src(sy, sx);
              gsrc(sy, sx) += gv * w_->value[wi];
            }
          }
        }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------

DepthwiseConv2d::DepthwiseConv2d(ParamStore &store, const std::string &name,
                                 int channels, int ksize, Rng &rng)
    : channels_(channels), ksize_(ksize) {
  if (ksize < 1 || ksize % 2 == 0)
    throw InvalidArgument("DepthwiseConv2d: kernel size must be odd");
  w_ = &store.add(name + ".weight", {channels, ksize, ksize});
  b_ = &store.add(name + ".bias", {channels});
  fan_in_init(*w_, static_cast<double>(ksize) * ksize, rng);
  fan_in_init(*b_, static_cast<double>(ksize) * ksize, rng);
}

FeatureMap DepthwiseConv2d::forward(const FeatureMap &x, Ctx *ctx) const {
  if (x.channels != channels_)
    throw InvalidArgument("DepthwiseConv2d: channel mismatch");
  if (ctx) ctx->x = x;
  const int radius = ksize_ / 2;
  const int h = x.height, w = x.width;
  FeatureMap out(h, w, channels_);

  RowMajorMatrixXd padded(h + 2 * radius, w + 2 * radius);
  for (int c = 0; c < channels_; ++c) {
    padded.setZero();
    padded.block(radius, radius, h, w) = plane(x, c);
    auto dst = plane(out, c);
    dst.setConstant(b_->value[c]);
    const double *wc = w_->value.data() +
                       static_cast<Eigen::Index>(c) * ksize_ * ksize_;
    for (int r = 0; r < h; ++r) {
      double *drow = dst.row(r).data();
      for (int ky = 0; ky < ksize_; ++ky) {
        const double *srow = padded.row(r + ky).data();
        for (int kx = 0; kx < ksize_; ++kx)
          kernels::axpy(wc[ky * ksize_ + kx], srow + kx, drow,
                        static_cast<std::size_t>(w));
      }
    }
  }
  return out;
}

FeatureMap DepthwiseConv2d::backward(const Ctx &ctx,
                                     const FeatureMap &gout) const {
  const FeatureMap &x = ctx.x;
  const int radius = ksize_ / 2;
  const int h = x.height, w = x.width;
  FeatureMap gx(h, w, channels_);
  b_->grad += gout.m.colwise().sum().transpose();

  RowMajorMatrixXd padded_x(h + 2 * radius, w + 2 * radius);
  RowMajorMatrixXd padded_g(h + 2 * radius, w + 2 * radius);
  for (int c = 0; c < channels_; ++c) {
    padded_x.setZero();
    padded_x.block(radius, radius, h, w) = plane(x, c);
    padded_g.setZero();
    padded_g.block(radius, radius, h, w) = plane(gout, c);
    const auto g = plane(gout, c);
    auto gdst = plane(gx, c);
    const Eigen::Index off = static_cast<Eigen::Index>(c) * ksize_ * ksize_;
    // weight gradients: correlate gout with the padded input
    for (int ky = 0; ky < ksize_; ++ky)
      for (int kx = 0; kx < ksize_; ++kx) {
        double acc = 0.0;
        for (int r = 0; r < h; ++r)
          acc += kernels::dot(g.row(r).data(),
                              padded_x.row(r + ky).data() + kx,
                              static_cast<std::size_t>(w));
        w_->grad[off + ky * ksize_ + kx] += acc;
      }
    // input gradients: convolve gout with the flipped kernel
    const double *wc = w_->value.data() + off;
    for (int r = 0; r < h; ++r) {
      double *drow = gdst.row(r).data();
      for (int ky = 0; ky < ksize_; ++ky) {
        const double *srow = padded_g.row(r + ky).data();
        for (int kx = 0; kx < ksize_; ++kx)
          kernels::axpy(wc[(ksize_ - 1 - ky) * ksize_ + (ksize_ - 1 - kx)],
                        srow + kx, drow, static_cast<std::size_t>(w));
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------

ConvTranspose2d::ConvTranspose2d(ParamStore &store, const std::string &name,
                                 int cin, int cout, Rng &rng)
    : cin_(cin), cout_(cout) {
  w_ = &store.add(name + ".weight", {cout, cin, 2, 2});
  b_ = &store.add(name + ".bias", {cout});
  fan_in_init(*w_, cin, rng);
  fan_in_init(*b_, cin, rng);
}

FeatureMap ConvTranspose2d::forward(const FeatureMap &x, Ctx *ctx) const {
  if (x.channels != cin_)
    throw InvalidArgument("ConvTranspose2d: channel mismatch");
  if (ctx) ctx->x = x;
  const int h = x.height, w = x.width;
  FeatureMap out(2 * h, 2 * w, cout_);
  out.m.rowwise() += b_->value.transpose();
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj) {
      const auto wt = cmap2d(
          *w_, static_cast<Eigen::Index>(di * 2 + dj) * cout_ * cin_, cout_,
          cin_);
      const MatrixXd tmp = x.m * wt.transpose(); // (h*w) x cout
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          out.m.row(static_cast<Eigen::Index>(2 * r + di) * (2 * w) +
                    (2 * c + dj)) +=
              tmp.row(static_cast<Eigen::Index>(r) * w + c);
    }
  return out;
}

FeatureMap ConvTranspose2d::backward(const Ctx &ctx,
                                     const FeatureMap &gout) const {
  const FeatureMap &x = ctx.x;
  const int h = x.height, w = x.width;
  FeatureMap gx(h, w, cin_);
  b_->grad += gout.m.colwise().sum().transpose();
  MatrixXd gathered(static_cast<Eigen::Index>(h) * w, cout_);
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj) {
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          gathered.row(static_cast<Eigen::Index>(r) * w + c) =
              gout.m.row(static_cast<Eigen::Index>(2 * r + di) * (2 * w) +
                         (2 * c + dj));
      const Eigen::Index off =
          static_cast<Eigen::Index>(di * 2 + dj) * cout_ * cin_;
      gmap2d(*w_, off, cout_, cin_).noalias() += gathered.transpose() * x.m;
      gx.m.noalias() += gathered * cmap2d(*w_, off, cout_, cin_);
    }
  return gx;
}

// ---------------------------------------------------------------------------

LayerNorm::LayerNorm(ParamStore &store, const std::string &name, int channels)
    : channels_(channels) {
  gamma_ = &store.add(name + ".gamma", {channels});
  beta_ = &store.add(name + ".beta", {channels});
  gamma_->value.setOnes();
}

MatrixXd LayerNorm::forward(const MatrixXd &x, Ctx *ctx) const {
  if (x.cols() != channels_) throw InvalidArgument("LayerNorm: channel mismatch");
  constexpr double kEps = 1e-6;
  const VectorXd mean = x.rowwise().mean();
  MatrixXd centered = x.colwise() - mean;
  const VectorXd var = centered.array().square().rowwise().mean();
  const VectorXd inv_std = (var.array() + kEps).rsqrt();
  MatrixXd xhat = (centered.array().colwise() * inv_std.array()).matrix();
  MatrixXd out = xhat * gamma_->value.asDiagonal();
  out.rowwise() += beta_->value.transpose();
  if (ctx) {
    ctx->xhat = std::move(xhat);
    ctx->inv_std = inv_std;
  }
  return out;
}

MatrixXd LayerNorm::backward(const Ctx &ctx, const MatrixXd &gout) const {
  gamma_->grad +=
      (gout.array() * ctx.xhat.array()).colwise().sum().matrix().transpose();
  beta_->grad += gout.colwise().sum().transpose();

  const MatrixXd dxhat = gout * gamma_->value.asDiagonal();
  const VectorXd m1 = dxhat.rowwise().mean();
  const VectorXd m2 =
      (dxhat.array() * ctx.xhat.array()).rowwise().mean().matrix();
  MatrixXd dx = dxhat;
  dx.colwise() -= m1;
  dx -= (ctx.xhat.array().colwise() * m2.array()).matrix();
  return (dx.array().colwise() * ctx.inv_std.array()).matrix();
}

// ---------------------------------------------------------------------------

MatrixXd QrOrthonormalize::forward(const MatrixXd &x, Ctx *ctx) {
  const auto f = lowrank::qr_factor(x);
  if (ctx) {
    ctx->q = f.q;
    ctx->r = f.r;
  }
  return f.q;
}

MatrixXd QrOrthonormalize::backward(const Ctx &ctx, const MatrixXd &gout) {
  // grad_x = [gout + Q (W - S)] R^{-T}, S = Q^T gout,
  // W = strictly-lower(S - S^T); the positive-diagonal sign fix is
  // locally constant so it passes gradients through unchanged.
  const MatrixXd s = ctx.q.transpose() * gout;
  const MatrixXd w =
      (s - s.transpose()).triangularView<Eigen::StrictlyLower>();
  const MatrixXd rhs = gout + ctx.q * (w - s);
  // solve grad * R^T = rhs
  return ctx.r.triangularView<Eigen::Upper>()
      .solve(rhs.transpose())
      .transpose();
}

} // namespace lrsci::net
