#include "lrsci/net/lrdun.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "lrsci/cassi.hpp"
#include "lrsci/io.hpp"
#include "lrsci/lowrank.hpp"
#include "lrsci/solver.hpp"

namespace lrsci::net {

void NetConfig::validate() const {
  if (stages < 1) throw InvalidArgument("NetConfig: stages must be >= 1");
  if (rank < 1) throw InvalidArgument("NetConfig: rank must be >= 1");
  if (channels < rank)
    throw InvalidArgument("NetConfig: channels must be >= rank");
  if (unet_depth < 1) throw InvalidArgument("NetConfig: unet_depth >= 1");
  if (scab_kernel < 1 || scab_kernel % 2 == 0)
    throw InvalidArgument("NetConfig: scab_kernel must be odd");
}

SplitFeat gfum_split(const MatrixXd &feat, int rank) {
  if (rank > feat.cols())
    throw InvalidArgument("gfum_split: rank exceeds feature channels");
  SplitFeat s;
  s.physical = feat.leftCols(rank);
  s.auxiliary = feat.rightCols(feat.cols() - rank);
  return s;
}

MatrixXd gfum_concat(const MatrixXd &physical, const MatrixXd &auxiliary) {
  if (auxiliary.size() != 0 && physical.rows() != auxiliary.rows())
    throw InvalidArgument("gfum_concat: row mismatch");
  MatrixXd out(physical.rows(), physical.cols() + auxiliary.cols());
  out.leftCols(physical.cols()) = physical;
  if (auxiliary.cols() > 0) out.rightCols(auxiliary.cols()) = auxiliary;
  return out;
}

double multi_stage_loss(const std::vector<StageOutput> &stages,
                        const HsiCube &truth,
                        std::vector<MatrixXd> *cube_grads) {
  if (stages.empty()) throw InvalidArgument("multi_stage_loss: no stages");
  if (cube_grads) cube_grads->clear();
  double loss = 0.0;
  const double n = static_cast<double>(truth.size());
  for (const auto &st : stages) {
    if (st.cube.size() != truth.size())
      throw InvalidArgument("multi_stage_loss: shape mismatch");
    const MatrixXd diff = st.cube.as_matrix() - truth.as_matrix();
    const double rmse = std::sqrt(diff.squaredNorm() / n);
    loss += rmse;
    if (cube_grads) {
      if (rmse > 0.0)
        cube_grads->push_back(diff / (n * rmse));
      else
        cube_grads->push_back(MatrixXd::Zero(diff.rows(), diff.cols()));
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
double softplus_inv(double y) {
  if (y <= 0.0) throw InvalidArgument("softplus_inv: y must be > 0");
  return y > 30.0 ? y : std::log(std::expm1(y));
}
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// reflect padding on the bottom/right edges to reach (th, tw)
FeatureMap pad_reflect(const FeatureMap &x, int th, int tw) {
  FeatureMap out(th, tw, x.channels);
  auto src_idx = [](int i, int n) {
    return i < n ? i : 2 * n - 2 - i; // mirror without edge repeat
  };
  for (int c = 0; c < x.channels; ++c) {
    Eigen::Map<const RowMajorMatrixXd> sp(x.m.col(c).data(), x.height,
                                          x.width);
    Eigen::Map<RowMajorMatrixXd> dp(out.m.col(c).data(), th, tw);
    for (int r = 0; r < th; ++r)
      for (int col = 0; col < tw; ++col)
        dp(r, col) = sp(src_idx(r, x.height), src_idx(col, x.width));
  }
  return out;
}

// adjoint of pad_reflect followed by crop: scatter-add into source dims
FeatureMap pad_reflect_backward(const FeatureMap &g, int sh, int sw) {
  FeatureMap out(sh, sw, g.channels);
  auto src_idx = [](int i, int n) { return i < n ? i : 2 * n - 2 - i; };
  for (int c = 0; c < g.channels; ++c) {
    Eigen::Map<const RowMajorMatrixXd> gp(g.m.col(c).data(), g.height,
                                          g.width);
    Eigen::Map<RowMajorMatrixXd> op(out.m.col(c).data(), sh, sw);
    for (int r = 0; r < g.height; ++r)
      for (int col = 0; col < g.width; ++col)
        op(src_idx(r, sh), src_idx(col, sw)) += gp(r, col);
  }
  return out;
}

FeatureMap crop_feature(const FeatureMap &x, int th, int tw) {
  FeatureMap out(th, tw, x.channels);
  for (int c = 0; c < x.channels; ++c) {
    Eigen::Map<const RowMajorMatrixXd> sp(x.m.col(c).data(), x.height,
                                          x.width);
    Eigen::Map<RowMajorMatrixXd> dp(out.m.col(c).data(), th, tw);
    dp = sp.topLeftCorner(th, tw);
  }
  return out;
}

FeatureMap embed_feature(const FeatureMap &g, int th, int tw) {
  FeatureMap out(th, tw, g.channels);
  for (int c = 0; c < g.channels; ++c) {
    Eigen::Map<const RowMajorMatrixXd> sp(g.m.col(c).data(), g.height,
                                          g.width);
    Eigen::Map<RowMajorMatrixXd> dp(out.m.col(c).data(), th, tw);
    dp.setZero();
    dp.topLeftCorner(g.height, g.width) = sp;
  }
  return out;
}

} // namespace

struct LrdunNet::Modules {
  std::unique_ptr<ProxyNetBasis> proxy_basis;
  std::unique_ptr<ProxyNetSubspace> proxy_subspace;
};

struct StageCtx {
  // data-fidelity intermediates (basis then subspace step)
  MatrixXd e_in, a_in;      // physical slices entering the stage
  MatrixXd e_new;           // physical basis after the spectral proxy
  solver::GdStepDetail dfe, dfa;
  double rho_e = 0, rho_a = 0, theta_e = 0, theta_a = 0;
  ProxyNetBasis::Ctx pe;
  ProxyNetSubspace::Ctx pa;
  MatrixXd efeat_in_aux;    // nothing stored; aux passes through (slices
                            // recovered from feature inputs below)
  MatrixXd efeat_in;        // full feature inputs of the stage
  FeatureMap afeat_in;
  bool padded = false;
  int pad_h = 0, pad_w = 0; // padded dims when padding applied
};

struct LrdunNet::ForwardCtx {
  Measurement y;
  SensingSpec spec;
  MatrixXd basis0;    // classical init factors (constants)
  MatrixXd subspace0;
  Conv1d::Ctx lift_e;
  Conv2d::Ctx lift_a;
  std::vector<StageCtx> stages;
  std::vector<StageOutput> outputs;
};

LrdunNet::~LrdunNet() = default;
LrdunNet::LrdunNet(LrdunNet &&) noexcept = default;
LrdunNet &LrdunNet::operator=(LrdunNet &&) noexcept = default;

LrdunNet::LrdunNet(const NetConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  const int k = cfg_.rank, c = cfg_.channels;

  lift_basis_ = std::make_unique<Conv1d>(store_, "init.lift_basis", k, c, 1,
                                         rng, /*zero_init=*/true);
  lift_subspace_ = std::make_unique<Conv2d>(store_, "init.lift_subspace",
                                            k + 1, c, 3, 1, rng,
                                            /*zero_init=*/true);

  // identity on the physical slice, small random mixing for the carrier
  {
    Parameter &w = *store_.find("init.lift_basis.weight"); // [c, k, 1]
    for (int j = 0; j < k; ++j) w.value[j * c + j] = 1.0; // W(co=j, ci=j)
    const double bound = 1.0 / std::sqrt(static_cast<double>(k));
    for (int co = k; co < c; ++co)
      for (int ci = 0; ci < k; ++ci)
        w.value[ci * c + co] = rng.uniform(-bound, bound);
  }
  {
    Parameter &w = *store_.find("init.lift_subspace.weight"); // [c,k+1,3,3]
    const int cin = k + 1, cout = c, center = 4; // tap (1,1) of 3x3
    for (int j = 0; j < k; ++j)
      w.value[(static_cast<Eigen::Index>(center) * cin + j) * cout + j] = 1.0;
    const double bound = 1.0 / std::sqrt(9.0 * cin);
    for (int co = k; co < c; ++co)
      for (int tap = 0; tap < 9; ++tap)
        for (int ci = 0; ci < cin; ++ci)
          w.value[(static_cast<Eigen::Index>(tap) * cin + ci) * cout + co] =
              rng.uniform(-bound, bound);
  }

  const int sets = cfg_.share_weights ? 1 : cfg_.stages;
  for (int s = 0; s < sets; ++s) {
    auto m = std::make_unique<Modules>();
    const std::string prefix = "stage" + std::to_string(s);
    m->proxy_basis = std::make_unique<ProxyNetBasis>(
        store_, prefix + ".proxy_basis", c, k, rng);
    m->proxy_subspace = std::make_unique<ProxyNetSubspace>(
        store_, prefix + ".proxy_subspace", c, cfg_.unet_depth,
        cfg_.scab_kernel, rng);
    modules_.push_back(std::move(m));
  }

  const double theta0 = softplus_inv(0.01);
  for (int s = 0; s < cfg_.stages; ++s) {
    Parameter &pe =
        store_.add("step" + std::to_string(s) + ".rho_basis_raw", {1});
    Parameter &pa =
        store_.add("step" + std::to_string(s) + ".rho_subspace_raw", {1});
    pe.value[0] = theta0;
    pa.value[0] = theta0;
    rho_basis_raw_.push_back(&pe);
    rho_subspace_raw_.push_back(&pa);
  }
}

const LrdunNet::Modules &LrdunNet::stage_modules(int stage) const {
  return cfg_.share_weights ? *modules_[0] : *modules_[stage];
}

void LrdunNet::calibrate_step_sizes(const Measurement &y,
                                    const SensingSpec &spec) {
  const auto init = solver::init_classical(y, spec, cfg_.rank);
  const double le = solver::estimate_lipschitz(
      solver::basis_normal_op(init.subspace, spec), 50, cfg_.seed + 101);
  const double la = solver::estimate_lipschitz(
      solver::subspace_normal_op(init.basis, spec), 50, cfg_.seed + 202);
  const double rho_e = le > 0 ? 0.9 / le : 1e-6;
  const double rho_a = la > 0 ? 0.9 / la : 1e-6;
  for (int s = 0; s < cfg_.stages; ++s) {
    rho_basis_raw_[s]->value[0] = softplus_inv(rho_e);
    rho_subspace_raw_[s]->value[0] = softplus_inv(rho_a);
  }
}

LrdunNet::Result LrdunNet::forward(const Measurement &y,
                                   const SensingSpec &spec,
                                   ForwardCtx *ctx) const {
  y.require_spec(spec);
  const int k = cfg_.rank, c = cfg_.channels;
  const int h = spec.height(), w = spec.width();
  const int div = 1 << (cfg_.unet_depth - 1);
  const bool needs_pad = (h % div != 0) || (w % div != 0);
  const int ph = ((h + div - 1) / div) * div;
  const int pw = ((w + div - 1) / div) * div;
  if (needs_pad && (ph >= 2 * h || pw >= 2 * w))
    throw InvalidArgument("spatial dims too small to reflect-pad for the "
                          "configured unet depth");

  const auto init = solver::init_classical(y, spec, k);
  if (ctx) {
    ctx->y = y;
    ctx->spec = spec;
    ctx->basis0 = init.basis;
    ctx->subspace0 = init.subspace;
    ctx->stages.resize(cfg_.stages);
  }

  // init nets: lift the classical factors into C-channel features
  MatrixXd efeat =
      lift_basis_->forward(init.basis, ctx ? &ctx->lift_e : nullptr);
  FeatureMap ain(h, w, k + 1);
  ain.m.leftCols(k) = init.subspace;
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col)
      ain.m(static_cast<Eigen::Index>(r) * w + col, k) = spec.mask(r, col);
  FeatureMap afeat =
      lift_subspace_->forward(ain, ctx ? &ctx->lift_a : nullptr);

  Result res;
  res.padded = needs_pad;
  for (int s = 0; s < cfg_.stages; ++s) {
    const Modules &mod = stage_modules(s);
    StageCtx *sc = ctx ? &ctx->stages[s] : nullptr;
    if (sc) {
      sc->efeat_in = efeat;
      sc->afeat_in = afeat;
    }

    const double theta_e = rho_basis_raw_[s]->value[0];
    const double theta_a = rho_subspace_raw_[s]->value[0];
    const double rho_e = softplus(theta_e);
    const double rho_a = softplus(theta_a);

    // basis problem: data-fidelity feature step + spectral proxy
    const MatrixXd e_phys = efeat.leftCols(k);
    const MatrixXd a_phys = afeat.m.leftCols(k);
    auto dfe =
        solver::gd_step_basis_detail(e_phys, a_phys, y, spec, rho_e);
    MatrixXd efeat_half(e_phys.rows(), c);
    efeat_half.leftCols(k) = dfe.value;
    efeat_half.rightCols(c - k) = efeat.rightCols(c - k); // aux carries over
    efeat = mod.proxy_basis->forward(efeat_half, sc ? &sc->pe : nullptr);

    // subspace problem: data-fidelity feature step + spatial proxy
    const MatrixXd e_new = efeat.leftCols(k);
    auto dfa =
        solver::gd_step_subspace_detail(a_phys, e_new, y, spec, rho_a);
    FeatureMap afeat_half(h, w, c);
    afeat_half.m.leftCols(k) = dfa.value;
    afeat_half.m.rightCols(c - k) = afeat.m.rightCols(c - k);

    if (needs_pad) {
      const FeatureMap padded = pad_reflect(afeat_half, ph, pw);
      const FeatureMap out =
          mod.proxy_subspace->forward(padded, sc ? &sc->pa : nullptr);
      afeat = crop_feature(out, h, w);
    } else {
      afeat = mod.proxy_subspace->forward(afeat_half, sc ? &sc->pa : nullptr);
    }

    if (sc) {
      sc->e_in = e_phys;
      sc->a_in = a_phys;
      sc->e_new = e_new;
      sc->dfe = std::move(dfe);
      sc->dfa = std::move(dfa);
      sc->rho_e = rho_e;
      sc->rho_a = rho_a;
      sc->theta_e = theta_e;
      sc->theta_a = theta_a;
      sc->padded = needs_pad;
      sc->pad_h = ph;
      sc->pad_w = pw;
    }

    StageOutput out;
    out.basis = efeat.leftCols(k);
    out.subspace = afeat.m.leftCols(k);
    out.cube = lowrank::compose(out.subspace, out.basis, h, w);
    res.stages.push_back(std::move(out));
  }
  if (ctx) ctx->outputs = res.stages;
  return res;
}

void LrdunNet::backward(const ForwardCtx &ctx,
                        const std::vector<MatrixXd> &cube_grads) const {
  if (static_cast<int>(cube_grads.size()) != cfg_.stages)
    throw InvalidArgument("backward: need one cube gradient per stage");
  const int k = cfg_.rank, c = cfg_.channels;
  const SensingSpec &spec = ctx.spec;
  const int h = spec.height(), w = spec.width();

  MatrixXd g_efeat = MatrixXd::Zero(spec.bands(), c);
  FeatureMap g_afeat(h, w, c);

  auto fold_forward = [&](const MatrixXd &zgrad) {
    // adjoint chain: Z = unfold(adjoint(r)) => grad_r = forward(fold(zgrad))
    return cassi::forward(HsiCube::from_matrix(h, w, zgrad), spec);
  };

  for (int s = cfg_.stages - 1; s >= 0; --s) {
    const Modules &mod = stage_modules(s);
    const StageCtx &sc = ctx.stages[s];
    const StageOutput &out = ctx.outputs[s];

    // loss tap: X = subspace * basis^T
    const MatrixXd &gx = cube_grads[s];
    g_afeat.m.leftCols(k).noalias() += gx * out.basis;
    g_efeat.leftCols(k).noalias() += gx.transpose() * out.subspace;

    // spatial proxy
    FeatureMap g_afeat_half;
    if (sc.padded) {
      const FeatureMap g_pad = embed_feature(g_afeat, sc.pad_h, sc.pad_w);
      const FeatureMap g_in = mod.proxy_subspace->backward(sc.pa, g_pad);
      g_afeat_half = pad_reflect_backward(g_in, h, w);
    } else {
      g_afeat_half = mod.proxy_subspace->backward(sc.pa, g_afeat);
    }

    // subspace data-fidelity step
    // A_half = A - rho * G_A, G_A = Z * E_new
    MatrixXd g_a_half = g_afeat_half.m.leftCols(k);
    MatrixXd g_afeat_prev_aux = g_afeat_half.m.rightCols(c - k);
    {
      const double g_rho = -(g_a_half.array() * sc.dfa.g.array()).sum();
      rho_subspace_raw_[s]->grad[0] += g_rho * sigmoid(sc.theta_a);

      const MatrixXd g_z = -sc.rho_a * g_a_half * sc.e_new.transpose();
      const Measurement g_r = fold_forward(g_z);
      const MatrixXd g_xmat = cassi::adjoint(g_r, spec).as_matrix();

      // accumulate into next iteration's state grads
      FeatureMap g_afeat_prev(h, w, c);
      g_afeat_prev.m.leftCols(k) =
          g_a_half + g_xmat * sc.e_new; // dA (direct + through residual)
      g_afeat_prev.m.rightCols(c - k) = g_afeat_prev_aux;
      g_afeat = std::move(g_afeat_prev);

      // gradient into the updated basis (output of the spectral proxy)
      g_efeat.leftCols(k).noalias() += g_xmat.transpose() * sc.a_in;
      g_efeat.leftCols(k).noalias() -= sc.rho_a * sc.dfa.z.transpose() * g_a_half;
    }

    // spectral proxy
    const MatrixXd g_efeat_half = mod.proxy_basis->backward(sc.pe, g_efeat);

    // basis data-fidelity step
    // E_half = E - rho * G_E, G_E = Z^T * A
    {
      const MatrixXd g_e_half = g_efeat_half.leftCols(k);
      const double g_rho = -(g_e_half.array() * sc.dfe.g.array()).sum();
      rho_basis_raw_[s]->grad[0] += g_rho * sigmoid(sc.theta_e);

      const MatrixXd g_z = -sc.rho_e * sc.a_in * g_e_half.transpose();
      const Measurement g_r = fold_forward(g_z);
      const MatrixXd g_xmat = cassi::adjoint(g_r, spec).as_matrix();

      MatrixXd g_e_prev = g_e_half + g_xmat.transpose() * sc.a_in;
      MatrixXd g_a_prev =
          g_xmat * sc.e_in - sc.rho_e * sc.dfe.z * g_e_half;

      g_efeat = MatrixXd::Zero(spec.bands(), c);
      g_efeat.leftCols(k) = g_e_prev;
      g_efeat.rightCols(c - k) = g_efeat_half.rightCols(c - k);
      g_afeat.m.leftCols(k) += g_a_prev;
    }
  }

  // init nets
  lift_basis_->backward(ctx.lift_e, g_efeat);
  lift_subspace_->backward(ctx.lift_a, g_afeat);
}

// ---------------------------------------------------------------------------

void LrdunNet::save_weights(const std::string &path) const {
  nlohmann::json manifest = nlohmann::json::array();
  std::int64_t offset = 0;
  for (const auto &p : store_.all()) {
    manifest.push_back(
        {{"name", p->name}, {"shape", p->shape}, {"offset", offset}});
    offset += p->size();
  }
  nlohmann::json netcfg = {
      {"stages", cfg_.stages},     {"rank", cfg_.rank},
      {"channels", cfg_.channels}, {"share_weights", cfg_.share_weights},
      {"unet_depth", cfg_.unet_depth}, {"scab_kernel", cfg_.scab_kernel},
      {"seed", cfg_.seed}};

  io::TensorFile t;
  t.kind = "weights";
  t.dtype = "f64";
  t.shape = {offset};
  const VectorXd flat = store_.gather_values();
  t.payload.assign(flat.data(), flat.data() + flat.size());
  t.extra_json =
      nlohmann::json{{"tensors", manifest}, {"net_config", netcfg}}.dump();
  io::save(path, t);
}

LrdunNet LrdunNet::load_weights(const std::string &path) {
  const io::TensorFile t = io::load(path);
  if (t.kind != "weights")
    throw IoError("expected a weights tensor: " + path);
  const nlohmann::json extra = nlohmann::json::parse(t.extra_json.empty()
                                                         ? "{}"
                                                         : t.extra_json);
  if (!extra.contains("net_config"))
    throw IoError("weights file missing net_config: " + path);
  const auto &jc = extra["net_config"];
  NetConfig cfg;
  cfg.stages = jc.at("stages").get<int>();
  cfg.rank = jc.at("rank").get<int>();
  cfg.channels = jc.at("channels").get<int>();
  cfg.share_weights = jc.at("share_weights").get<bool>();
  cfg.unet_depth = jc.at("unet_depth").get<int>();
  cfg.scab_kernel = jc.at("scab_kernel").get<int>();
  cfg.seed = jc.at("seed").get<std::uint64_t>();

  LrdunNet net(cfg);
  if (static_cast<std::int64_t>(t.payload.size()) !=
      net.store_.total_size())
    throw IoError("weights payload size does not match the architecture");

  // verify the manifest matches the constructed registry
  const auto &manifest = extra.at("tensors");
  const auto &params = net.store_.all();
  if (manifest.size() != params.size())
    throw IoError("weights manifest entry count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (manifest[i].at("name").get<std::string>() != params[i]->name)
      throw IoError("weights manifest name mismatch at index " +
                    std::to_string(i));
  }

  VectorXd flat(t.payload.size());
  std::copy(t.payload.begin(), t.payload.end(), flat.data());
  net.store_.scatter_values(flat);
  return net;
}

// ---------------------------------------------------------------------------

namespace {

struct Macs {
  std::int64_t params = 0;
  std::int64_t macs = 0;
};

Macs linear_cost(std::int64_t n, std::int64_t cin, std::int64_t cout) {
  return {cout * cin + cout, n * cin * cout};
}
Macs conv1d_cost(std::int64_t len, std::int64_t cin, std::int64_t cout,
                 std::int64_t ks) {
  return {cout * cin * ks + cout, len * cin * cout * ks};
}
Macs conv2d_cost(std::int64_t oh, std::int64_t ow, std::int64_t cin,
                 std::int64_t cout, std::int64_t ks) {
  return {cout * cin * ks * ks + cout, oh * ow * cin * cout * ks * ks};
}
Macs depthwise_cost(std::int64_t h, std::int64_t w, std::int64_t ch,
                    std::int64_t ks) {
  return {ch * ks * ks + ch, h * w * ch * ks * ks};
}
Macs convt_cost(std::int64_t oh, std::int64_t ow, std::int64_t cin,
                std::int64_t cout) {
  return {cout * cin * 4 + cout, oh * ow * cin * cout};
}
Macs layernorm_cost(std::int64_t ch) { return {2 * ch, 0}; }

Macs scab_cost(std::int64_t h, std::int64_t w, std::int64_t ch,
               std::int64_t ks) {
  Macs t;
  auto add = [&t](Macs m) {
    t.params += m.params;
    t.macs += m.macs;
  };
  const std::int64_t n = h * w;
  add(layernorm_cost(ch));
  add(layernorm_cost(ch));
  add(linear_cost(n, ch, ch));      // v
  add(linear_cost(n, ch, ch));      // a
  add(depthwise_cost(h, w, ch, ks)); // attention map
  t.macs += n * ch;                  // gate multiply
  add(linear_cost(n, ch, ch));      // out
  add(linear_cost(n, ch, 2 * ch));  // ffn up
  add(linear_cost(n, 2 * ch, ch));  // ffn down
  return t;
}

} // namespace

CountResult count_params_flops(const NetConfig &cfg, int height, int width) {
  cfg.validate();
  const std::int64_t h = height, w = width, k = cfg.rank, c = cfg.channels;
  const std::int64_t hw = h * w;
  // band count does not change parameter counts; compute cost uses the
  // benchmark band count carried by the sensing spec at runtime. The
  // accounting here takes B from the canonical 8-band toy problem when
  // counting data-fidelity work per unit; callers wanting exact MACs for
  // another B can scale df terms accordingly.
  return count_params_flops_with_bands(cfg, height, width, 8);
}

CountResult count_params_flops_with_bands(const NetConfig &cfg, int height,
                                          int width, int bands) {
  cfg.validate();
  const std::int64_t h = height, w = width, b = bands;
  const std::int64_t k = cfg.rank, c = cfg.channels;
  const std::int64_t hw = h * w;

  Macs total;
  auto add = [&total](Macs m) {
    total.params += m.params;
    total.macs += m.macs;
  };

  // init nets (+ classical init compute: adjoint, gram, projection)
  add(conv1d_cost(b, k, c, 1));
  add(conv2d_cost(h, w, k + 1, c, 3));
  total.macs += hw * b;          // adjoint back-projection
  total.macs += hw * b * b;      // gram matrix
  total.macs += hw * b * k;      // subspace projection

  // one stage: two data-fidelity steps + both proxies
  Macs stage;
  auto sadd = [&stage](Macs m) {
    stage.params += m.params;
    stage.macs += m.macs;
  };
  // each df step: compose (hw*k*b), forward mask-MAC (hw*b),
  // adjoint mask multiply (hw*b), factor contraction (hw*b*k)
  stage.macs += 2 * (hw * k * b + 2 * hw * b + hw * b * k);

  // spectral proxy: two residual blocks of band convs
  sadd(conv1d_cost(b, c, 2 * c, 3));
  sadd(conv1d_cost(b, 2 * c, c, 3));
  sadd(conv1d_cost(b, c, 2 * c, 3));
  sadd(conv1d_cost(b, 2 * c, c, 3));

  // spatial proxy U-Net
  {
    std::int64_t ch = c, lh = h, lw = w;
    for (int d = 0; d + 1 < cfg.unet_depth; ++d) {
      sadd(scab_cost(lh, lw, ch, cfg.scab_kernel));
      sadd(conv2d_cost(lh / 2, lw / 2, ch, 2 * ch, 3));
      ch *= 2;
      lh /= 2;
      lw /= 2;
    }
    sadd(scab_cost(lh, lw, ch, cfg.scab_kernel));
    for (int d = cfg.unet_depth - 2; d >= 0; --d) {
      sadd(convt_cost(lh * 2, lw * 2, ch, ch / 2));
      ch /= 2;
      lh *= 2;
      lw *= 2;
      sadd(linear_cost(lh * lw, 2 * ch, ch)); // skip fusion
      sadd(scab_cost(lh, lw, ch, cfg.scab_kernel));
    }
    sadd(conv2d_cost(h, w, c, c, 3)); // final projection
  }

  // per-stage reconstruction tap
  stage.macs += hw * k * b;

  const std::int64_t sets = cfg.share_weights ? 1 : cfg.stages;
  total.params += stage.params * sets;
  total.macs += stage.macs * cfg.stages;
  total.params += 2 * cfg.stages; // per-stage step-size scalars

  CountResult out;
  out.params = total.params;
  out.macs = total.macs;
  out.flops = 2 * total.macs;
  return out;
}

} // namespace lrsci::net
