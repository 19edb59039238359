#pragma once

#include "lrsci/net/layers.hpp"

namespace lrsci::net {

/// Spatial conv attention block. Pre-norm, a gated large-kernel branch
/// (value projection times a depthwise-convolved attention map) added
/// residually, then a pre-norm pointwise feed-forward (expand 2x, GELU,
/// contract) with its own residual. The two output projections are
/// zero-initialized, so a fresh block is an exact identity.
class Scab {
public:
  Scab(ParamStore &store, const std::string &name, int channels,
       int attn_kernel, Rng &rng);

  struct Ctx {
    LayerNorm::Ctx ln1, ln2;
    Linear::Ctx v, a, out, up, down;
    DepthwiseConv2d::Ctx dw;
    MatrixXd vmat, attn, up_out;
    int height = 0, width = 0;
  };

  FeatureMap forward(const FeatureMap &x, Ctx *ctx) const;
  FeatureMap backward(const Ctx &ctx, const FeatureMap &gout) const;

private:
  LayerNorm ln1_, ln2_;
  Linear v_, a_, out_, up_, down_;
  DepthwiseConv2d dw_;
};

/// Spectral proximal module: two residual blocks of band-axis
/// convolutions (C -> 2C -> C, GELU between, second conv zero-initialized)
/// followed by orthonormalization of the physical slice. Input and output
/// are B x C spectral features; the first `rank` columns come out with
/// orthonormal columns.
class ProxyNetBasis {
public:
  ProxyNetBasis(ParamStore &store, const std::string &name, int channels,
                int rank, Rng &rng);

  struct Ctx {
    Conv1d::Ctx c1, c2, c3, c4;
    MatrixXd g1_in, g2_in; // pre-GELU activations
    QrOrthonormalize::Ctx qr;
  };

  MatrixXd forward(const MatrixXd &efeat, Ctx *ctx) const;
  MatrixXd backward(const Ctx &ctx, const MatrixXd &gout) const;

private:
  int rank_;
  Conv1d c1_, c2_, c3_, c4_;
};

/// Spatial proximal module: a U-Net over the subspace features. Each
/// scale is one SCAB; downsampling is a stride-2 conv doubling channels,
/// upsampling a 2x2 transposed conv halving them, with skip concatenation
/// fused by a pointwise projection. The final 3x3 projection is
/// zero-initialized and added to the input (exact identity at init).
/// Spatial dims must be divisible by 2^(depth-1).
class ProxyNetSubspace {
public:
  ProxyNetSubspace(ParamStore &store, const std::string &name, int channels,
                   int depth, int attn_kernel, Rng &rng);

  struct Ctx {
    std::vector<Scab::Ctx> enc, dec;
    std::vector<Conv2d::Ctx> down;
    std::vector<ConvTranspose2d::Ctx> up;
    std::vector<Linear::Ctx> fuse;
    Scab::Ctx mid;
    Conv2d::Ctx final;
    std::vector<FeatureMap> skips;
  };

  FeatureMap forward(const FeatureMap &x, Ctx *ctx) const;
  FeatureMap backward(const Ctx &ctx, const FeatureMap &gout) const;

  int depth() const { return depth_; }

private:
  int channels_, depth_;
  std::vector<Scab> enc_, dec_;
  std::vector<Conv2d> down_;
  std::vector<ConvTranspose2d> up_;
  std::vector<Linear> fuse_;
  std::unique_ptr<Scab> mid_;
  std::unique_ptr<Conv2d> final_;
};

} // namespace lrsci::net
