#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lrsci/rng.hpp"
#include "lrsci/types.hpp"

namespace lrsci::net {

/// One learnable tensor: flat value/grad storage plus shape metadata for
/// serialization and counting.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  VectorXd value;
  VectorXd grad;

  Eigen::Index size() const { return value.size(); }
};

/// Owns every parameter of a network in construction order (the order is
/// the optimizer and serialization layout).
class ParamStore {
public:
  Parameter &add(std::string name, std::vector<int> shape);
  Parameter *find(const std::string &name);
  const std::vector<std::unique_ptr<Parameter>> &all() const {
    return params_;
  }
  Eigen::Index total_size() const;
  void zero_grad();
  VectorXd gather_values() const;
  VectorXd gather_grads() const;
  void scatter_values(const VectorXd &flat);

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Spatial feature block: H x W pixels, C channels. Storage is
/// (H*W) x C with each channel a column whose H*W entries are the plane
/// in spatial row-major order.
struct FeatureMap {
  int height = 0, width = 0, channels = 0;
  MatrixXd m;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c)
      : height(h), width(w), channels(c),
        m(MatrixXd::Zero(static_cast<Eigen::Index>(h) * w, c)) {}
};

// Elementwise GELU (exact erf form) and its input-side backward.
MatrixXd gelu(const MatrixXd &x);
MatrixXd gelu_backward(const MatrixXd &x, const MatrixXd &gout);

/// Pointwise channel mix (a 1x1 convolution): out = x * W^T + b.
class Linear {
public:
  Linear(ParamStore &store, const std::string &name, int cin, int cout,
         Rng &rng, bool zero_init = false);

  struct Ctx {
    MatrixXd x;
  };
  MatrixXd forward(const MatrixXd &x, Ctx *ctx) const;
  MatrixXd backward(const Ctx &ctx, const MatrixXd &gout) const;

  int cin() const { return cin_; }
  int cout() const { return cout_; }

private:
  Parameter *w_, *b_;
  int cin_, cout_;
  friend class LrdunNet;
};

/// 1D convolution along the band axis, zero 'same' padding.
/// Input B x cin, output B x cout.
class Conv1d {
public:
  Conv1d(ParamStore &store, const std::string &name, int cin, int cout,
         int ksize, Rng &rng, bool zero_init = false);

  struct Ctx {
    MatrixXd x;
  };
  MatrixXd forward(const MatrixXd &x, Ctx *ctx) const;
  MatrixXd backward(const Ctx &ctx, const MatrixXd &gout) const;

private:
  Parameter *w_, *b_;
  int cin_, cout_, ksize_;
  friend class LrdunNet;
};

/// 2D convolution with zero padding (ksize-1)/2. stride 1 preserves the
/// spatial size; stride 2 halves even dims.
class Conv2d {
public:
  Conv2d(ParamStore &store, const std::string &name, int cin, int cout,
         int ksize, int stride, Rng &rng, bool zero_init = false);

  struct Ctx {
    FeatureMap x;
  };
  FeatureMap forward(const FeatureMap &x, Ctx *ctx) const;
  FeatureMap backward(const Ctx &ctx, const FeatureMap &gout) const;

private:
  Parameter *w_, *b_;
  int cin_, cout_, ksize_, stride_;
  friend class LrdunNet;
};

/// Depthwise 2D convolution (one ksize x ksize filter per channel),
/// zero 'same' padding. The large-kernel attention path of SCAB.
class DepthwiseConv2d {
public:
  DepthwiseConv2d(ParamStore &store, const std::string &name, int channels,
                  int ksize, Rng &rng);

  struct Ctx {
    FeatureMap x;
  };
  FeatureMap forward(const FeatureMap &x, Ctx *ctx) const;
  FeatureMap backward(const Ctx &ctx, const FeatureMap &gout) const;

private:
  Parameter *w_, *b_;
  int channels_, ksize_;
};

/// 2x nearest upsampling via a 2x2 stride-2 transposed convolution.
class ConvTranspose2d {
public:
  ConvTranspose2d(ParamStore &store, const std::string &name, int cin,
                  int cout, Rng &rng);

  struct Ctx {
    FeatureMap x;
  };
  FeatureMap forward(const FeatureMap &x, Ctx *ctx) const;
  FeatureMap backward(const Ctx &ctx, const FeatureMap &gout) const;

private:
  Parameter *w_, *b_;
  int cin_, cout_;
};

/// Per-pixel layer norm across channels with per-channel affine.
class LayerNorm {
public:
  LayerNorm(ParamStore &store, const std::string &name, int channels);

  struct Ctx {
    MatrixXd xhat;
    VectorXd inv_std;
  };
  MatrixXd forward(const MatrixXd &x, Ctx *ctx) const;
  MatrixXd backward(const Ctx &ctx, const MatrixXd &gout) const;

private:
  Parameter *gamma_, *beta_;
  int channels_;
};

/// Sign-fixed thin QR projected to the Q factor, with the exact
/// product-rule gradient through the factorization.
class QrOrthonormalize {
public:
  struct Ctx {
    MatrixXd q, r;
  };
  static MatrixXd forward(const MatrixXd &x, Ctx *ctx);
  static MatrixXd backward(const Ctx &ctx, const MatrixXd &gout);
};

} // namespace lrsci::net
