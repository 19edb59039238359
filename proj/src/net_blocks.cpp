#include "lrsci/net/blocks.hpp"

namespace lrsci::net {

Scab::Scab(ParamStore &store, const std::string &name, int channels,
           int attn_kernel, Rng &rng)
    : ln1_(store, name + ".ln1", channels), ln2_(store, name + ".ln2", channels),
      v_(store, name + ".v", channels, channels, rng),
      a_(store, name + ".a", channels, channels, rng),
      out_(store, name + ".out", channels, channels, rng, /*zero_init=*/true),
      up_(store, name + ".ffn_up", channels, 2 * channels, rng),
      down_(store, name + ".ffn_down", 2 * channels, channels, rng,
            /*zero_init=*/true),
      dw_(store, name + ".attn_dw", channels, attn_kernel, rng) {}

FeatureMap Scab::forward(const FeatureMap &x, Ctx *ctx) const {
  if (ctx) {
    ctx->height = x.height;
    ctx->width = x.width;
  }
  // gated large-kernel attention branch
  const MatrixXd z = ln1_.forward(x.m, ctx ? &ctx->ln1 : nullptr);
  MatrixXd v = v_.forward(z, ctx ? &ctx->v : nullptr);
  FeatureMap a(x.height, x.width, x.channels);
  a.m = a_.forward(z, ctx ? &ctx->a : nullptr);
  const FeatureMap attn = dw_.forward(a, ctx ? &ctx->dw : nullptr);
  if (ctx) {
    ctx->vmat = v;
    ctx->attn = attn.m;
  }
  const MatrixXd gated = v.cwiseProduct(attn.m);
  FeatureMap mid(x.height, x.width, x.channels);
  mid.m = x.m + out_.forward(gated, ctx ? &ctx->out : nullptr);

  // convolutional feed-forward
  const MatrixXd z2 = ln2_.forward(mid.m, ctx ? &ctx->ln2 : nullptr);
  MatrixXd up = up_.forward(z2, ctx ? &ctx->up : nullptr);
  if (ctx) ctx->up_out = up;
  const MatrixXd act = gelu(up);
  FeatureMap out = mid;
  out.m += down_.forward(act, ctx ? &ctx->down : nullptr);
  return out;
}

FeatureMap Scab::backward(const Ctx &ctx, const FeatureMap &gout) const {
  // feed-forward residual
  MatrixXd g_act = down_.backward(ctx.down, gout.m);
  MatrixXd g_up = gelu_backward(ctx.up_out, g_act);
  MatrixXd g_mid = gout.m + ln2_.backward(ctx.ln2, up_.backward(ctx.up, g_up));

  // attention residual
  MatrixXd g_gated = out_.backward(ctx.out, g_mid);
  MatrixXd g_v = g_gated.cwiseProduct(ctx.attn);
  FeatureMap g_attn(ctx.height, ctx.width,
                    static_cast<int>(g_gated.cols()));
  g_attn.m = g_gated.cwiseProduct(ctx.vmat);
  const FeatureMap g_a = dw_.backward(ctx.dw, g_attn);
  const MatrixXd g_z =
      v_.backward(ctx.v, g_v) + a_.backward(ctx.a, g_a.m);

  FeatureMap gx(ctx.height, ctx.width, static_cast<int>(g_gated.cols()));
  gx.m = g_mid + ln1_.backward(ctx.ln1, g_z);
  return gx;
}

// ---------------------------------------------------------------------------

ProxyNetBasis::ProxyNetBasis(ParamStore &store, const std::string &name,
                             int channels, int rank, Rng &rng)
    : rank_(rank),
      c1_(store, name + ".conv1", channels, 2 * channels, 3, rng),
      c2_(store, name + ".conv2", 2 * channels, channels, 3, rng,
          /*zero_init=*/true),
      c3_(store, name + ".conv3", channels, 2 * channels, 3, rng),
      c4_(store, name + ".conv4", 2 * channels, channels, 3, rng,
          /*zero_init=*/true) {}

MatrixXd ProxyNetBasis::forward(const MatrixXd &efeat, Ctx *ctx) const {
  MatrixXd h1 = c1_.forward(efeat, ctx ? &ctx->c1 : nullptr);
  if (ctx) ctx->g1_in = h1;
  MatrixXd x = efeat + c2_.forward(gelu(h1), ctx ? &ctx->c2 : nullptr);

  MatrixXd h2 = c3_.forward(x, ctx ? &ctx->c3 : nullptr);
  if (ctx) ctx->g2_in = h2;
  x += c4_.forward(gelu(h2), ctx ? &ctx->c4 : nullptr);

  MatrixXd out(x.rows(), x.cols());
  out.leftCols(rank_) =
      QrOrthonormalize::forward(x.leftCols(rank_), ctx ? &ctx->qr : nullptr);
  out.rightCols(x.cols() - rank_) = x.rightCols(x.cols() - rank_);
  return out;
}

MatrixXd ProxyNetBasis::backward(const Ctx &ctx, const MatrixXd &gout) const {
  MatrixXd gx(gout.rows(), gout.cols());
  gx.leftCols(rank_) =
      QrOrthonormalize::backward(ctx.qr, gout.leftCols(rank_));
  gx.rightCols(gout.cols() - rank_) = gout.rightCols(gout.cols() - rank_);

  // second residual block
  MatrixXd g_act = c4_.backward(ctx.c4, gx);
  gx += c3_.backward(ctx.c3, gelu_backward(ctx.g2_in, g_act));

  // first residual block
  g_act = c2_.backward(ctx.c2, gx);
  gx += c1_.backward(ctx.c1, gelu_backward(ctx.g1_in, g_act));
  return gx;
}

// ---------------------------------------------------------------------------

ProxyNetSubspace::ProxyNetSubspace(ParamStore &store, const std::string &name,
                                   int channels, int depth, int attn_kernel,
                                   Rng &rng)
    : channels_(channels), depth_(depth) {
  if (depth < 1) throw InvalidArgument("ProxyNetSubspace: depth must be >= 1");
  int c = channels;
  for (int d = 0; d + 1 < depth; ++d) {
    enc_.emplace_back(store, name + ".enc" + std::to_string(d), c,
                      attn_kernel, rng);
    down_.emplace_back(store, name + ".down" + std::to_string(d), c, 2 * c, 3,
                       2, rng);
    c *= 2;
  }
  mid_ = std::make_unique<Scab>(store, name + ".mid", c, attn_kernel, rng);
  for (int d = depth - 2; d >= 0; --d) {
    up_.emplace_back(store, name + ".up" + std::to_string(d), c, c / 2, rng);
    c /= 2;
    fuse_.emplace_back(store, name + ".fuse" + std::to_string(d), 2 * c, c,
                       rng);
    dec_.emplace_back(store, name + ".dec" + std::to_string(d), c,
                      attn_kernel, rng);
  }
  final_ = std::make_unique<Conv2d>(store, name + ".final", channels,
                                    channels, 3, 1, rng, /*zero_init=*/true);
}

FeatureMap ProxyNetSubspace::forward(const FeatureMap &x, Ctx *ctx) const {
  const int div = 1 << (depth_ - 1);
  if (x.height % div != 0 || x.width % div != 0)
    throw InvalidArgument(
        "ProxyNetSubspace: spatial dims must be divisible by 2^(depth-1)");
  if (ctx) {
    ctx->enc.resize(enc_.size());
    ctx->down.resize(down_.size());
    ctx->up.resize(up_.size());
    ctx->fuse.resize(fuse_.size());
    ctx->dec.resize(dec_.size());
    ctx->skips.resize(enc_.size());
  }

  FeatureMap cur = x;
  std::vector<FeatureMap> skips;
  for (std::size_t d = 0; d < enc_.size(); ++d) {
    FeatureMap s = enc_[d].forward(cur, ctx ? &ctx->enc[d] : nullptr);
    if (ctx) ctx->skips[d] = s;
    skips.push_back(s);
    cur = down_[d].forward(s, ctx ? &ctx->down[d] : nullptr);
  }
  cur = mid_->forward(cur, ctx ? &ctx->mid : nullptr);
  for (std::size_t i = 0; i < up_.size(); ++i) {
    const std::size_t d = enc_.size() - 1 - i; // matching encoder level
    FeatureMap u = up_[i].forward(cur, ctx ? &ctx->up[i] : nullptr);
    const FeatureMap &skip = skips[d];
    MatrixXd cat(u.m.rows(), u.m.cols() + skip.m.cols());
    cat << skip.m, u.m;
    FeatureMap fused(u.height, u.width,
                     static_cast<int>(u.m.cols()));
    fused.m = fuse_[i].forward(cat, ctx ? &ctx->fuse[i] : nullptr);
    cur = dec_[i].forward(fused, ctx ? &ctx->dec[i] : nullptr);
  }
  FeatureMap out = x;
  out.m += final_->forward(cur, ctx ? &ctx->final : nullptr).m;
  return out;
}

FeatureMap ProxyNetSubspace::backward(const Ctx &ctx,
                                      const FeatureMap &gout) const {
  FeatureMap g = final_->backward(ctx.final, gout);
  std::vector<FeatureMap> g_skips(enc_.size());

  for (std::size_t i = up_.size(); i-- > 0;) {
    const std::size_t d = enc_.size() - 1 - i;
    FeatureMap g_fused = dec_[i].backward(ctx.dec[i], g);
    const MatrixXd g_cat = fuse_[i].backward(ctx.fuse[i], g_fused.m);
    const Eigen::Index half = g_cat.cols() / 2;
    FeatureMap g_skip(g_fused.height, g_fused.width,
                      static_cast<int>(half));
    g_skip.m = g_cat.leftCols(half);
    g_skips[d] = g_skip;
    FeatureMap g_up(g_fused.height, g_fused.width, static_cast<int>(half));
    g_up.m = g_cat.rightCols(half);
    g = up_[i].backward(ctx.up[i], g_up);
  }
  g = mid_->backward(ctx.mid, g);
  for (std::size_t d = enc_.size(); d-- > 0;) {
    FeatureMap g_s = down_[d].backward(ctx.down[d], g);
    g_s.m += g_skips[d].m;
    g = enc_[d].backward(ctx.enc[d], g_s);
  }
  g.m += gout.m; // global residual
  return g;
}

} // namespace lrsci::net
