#include "lrsci/solver.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "lrsci/cassi.hpp"
#include "lrsci/lowrank.hpp"
#include "lrsci/rng.hpp"

namespace lrsci::solver {

void SolverConfig::validate() const {
  if (rank < 1) throw InvalidArgument("SolverConfig: rank must be >= 1");
  if (max_iters < 0) throw InvalidArgument("SolverConfig: max_iters < 0");
  if (tol <= 0.0) throw InvalidArgument("SolverConfig: tol must be > 0");
  if (lambda_basis < 0.0 || lambda_subspace < 0.0)
    throw InvalidArgument("SolverConfig: lambda must be >= 0");
  if (power_iters < 1) throw InvalidArgument("SolverConfig: power_iters < 1");
  if (tv_iters < 1) throw InvalidArgument("SolverConfig: tv_iters < 1");
}

void SolveTrace::write_csv(std::ostream &os) const {
  for (const auto &line : header) os << "# " << line << "\n";
  os << "iter,objective,rel_residual,seconds\n";
  for (const auto &r : records)
    os << r.iter << ',' << r.objective << ',' << r.rel_residual << ','
       << r.seconds << "\n";
}

InitFactors init_classical(const Measurement &y, const SensingSpec &spec,
                           int k) {
  if (k < 1 || k > spec.bands())
    throw InvalidArgument("init_classical: k must be in [1, B]");
  y.require_spec(spec);

  InitFactors out;
  const double ymean = y.data.mean();
  if (y.data.cwiseAbs().maxCoeff() == 0.0) {
    out.basis = MatrixXd::Identity(spec.bands(), k);
    out.subspace = MatrixXd::Zero(
        static_cast<Eigen::Index>(spec.height()) * spec.width(), k);
    out.degenerate = true;
    return out;
  }

  HsiCube x0 = cassi::adjoint(y, spec);
  const double target = ymean / spec.bands();
  for (int b = 0; b < x0.bands(); ++b) {
    auto plane = x0.band(b);
    const double m = plane.mean();
    plane *= (m != 0.0) ? target / m : 0.0;
  }

  const auto f = lowrank::decompose_truncated_svd(x0, k);
  out.basis = f.basis;
  out.subspace = f.subspace;
  return out;
}

NormalOp basis_normal_op(const MatrixXd &subspace, const SensingSpec &spec) {
  NormalOp op;
  op.rows = spec.bands();
  op.cols = subspace.cols();
  op.apply = [subspace, spec](const MatrixXd &v) -> MatrixXd {
    Measurement w = lowrank::forward_lowrank(subspace, v, spec);
    return lowrank::grad_basis(w, subspace, spec);
  };
  return op;
}

NormalOp subspace_normal_op(const MatrixXd &basis, const SensingSpec &spec) {
  NormalOp op;
  op.rows = static_cast<Eigen::Index>(spec.height()) * spec.width();
  op.cols = basis.cols();
  op.apply = [basis, spec](const MatrixXd &v) -> MatrixXd {
    Measurement w = lowrank::forward_lowrank(v, basis, spec);
    return lowrank::grad_subspace(w, basis, spec);
  };
  return op;
}

double estimate_lipschitz(const NormalOp &op, int iters, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd v(op.rows, op.cols);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  double n = v.norm();
  if (n == 0.0) return 0.0;
  v /= n;

  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    const MatrixXd u = op.apply(v);
    lambda = (v.array() * u.array()).sum();
    n = u.norm();
    if (n == 0.0) return 0.0; // zero operator
    v = u / n;
  }
  return lambda;
}

GdStepDetail gd_step_basis_detail(const MatrixXd &basis,
                                  const MatrixXd &subspace,
                                  const Measurement &y,
                                  const SensingSpec &spec, double rho) {
  Measurement r = lowrank::forward_lowrank(subspace, basis, spec);
  r.data -= y.data;
  GdStepDetail d;
  d.z = cassi::adjoint(r, spec).as_matrix();
  d.g.noalias() = d.z.transpose() * subspace; // grad_basis materialized
  d.value = basis - rho * d.g;
  return d;
}

GdStepDetail gd_step_subspace_detail(const MatrixXd &subspace,
                                     const MatrixXd &basis,
                                     const Measurement &y,
                                     const SensingSpec &spec, double rho) {
  Measurement r = lowrank::forward_lowrank(subspace, basis, spec);
  r.data -= y.data;
  GdStepDetail d;
  d.z = cassi::adjoint(r, spec).as_matrix();
  d.g.noalias() = d.z * basis; // grad_subspace materialized
  d.value = subspace - rho * d.g;
  return d;
}

MatrixXd gd_step_basis(const MatrixXd &basis, const MatrixXd &subspace,
                       const Measurement &y, const SensingSpec &spec,
                       double rho) {
  return gd_step_basis_detail(basis, subspace, y, spec, rho).value;
}

MatrixXd gd_step_subspace(const MatrixXd &subspace, const MatrixXd &basis,
                          const Measurement &y, const SensingSpec &spec,
                          double rho) {
  return gd_step_subspace_detail(subspace, basis, y, spec, rho).value;
}

SolveResult solve_alternating(const Measurement &y, const SensingSpec &spec,
                              const SolverConfig &cfg) {
  cfg.validate();
  y.require_spec(spec);

  const auto t0 = std::chrono::steady_clock::now();
  const double ynorm = y.data.norm();

  SolveResult res;
  SolveTrace trace;
  trace.header = {
      "rank=" + std::to_string(cfg.rank),
      "max_iters=" + std::to_string(cfg.max_iters),
      "prox_basis=" + std::string(prox_name(cfg.prox_basis)),
      "prox_subspace=" + std::string(prox_name(cfg.prox_subspace)),
      "lambda_basis=" + std::to_string(cfg.lambda_basis),
      "lambda_subspace=" + std::to_string(cfg.lambda_subspace),
      "rho_basis=" + (cfg.rho_basis > 0 ? std::to_string(cfg.rho_basis)
                                        : std::string("auto")),
      "rho_subspace=" + (cfg.rho_subspace > 0
                             ? std::to_string(cfg.rho_subspace)
                             : std::string("auto")),
      "tol=" + std::to_string(cfg.tol),
      "seed=" + std::to_string(cfg.seed),
  };

  const InitFactors init = init_classical(y, spec, cfg.rank);
  MatrixXd basis = init.basis;
  MatrixXd subspace = init.subspace;
  res.degenerate_init = init.degenerate;

  const int h = spec.height(), w = spec.width();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };
  auto residual_norm = [&](const MatrixXd &a, const MatrixXd &e) {
    Measurement m = lowrank::forward_lowrank(a, e, spec);
    m.data -= y.data;
    return m.data.norm();
  };

  for (int it = 0; it < cfg.max_iters; ++it) {
    // basis half-problem
    double rho_e = cfg.rho_basis;
    if (rho_e <= 0.0) {
      const double l = estimate_lipschitz(basis_normal_op(subspace, spec),
                                          cfg.power_iters,
                                          cfg.seed + 2 * it);
      rho_e = l > 0.0 ? 0.9 / l : 0.0;
    }
    basis = gd_step_basis(basis, subspace, y, spec, rho_e);
    if (cfg.prox_basis == Prox::qr_orthonormalize) {
      basis = prox_apply(Prox::qr_orthonormalize,
                         cfg.lambda_basis * rho_e, basis, h, w, &subspace,
                         cfg.tv_iters, cfg.threads);
    } else {
      basis = prox_apply(cfg.prox_basis, cfg.lambda_basis * rho_e, basis, h,
                         w, nullptr, cfg.tv_iters, cfg.threads);
    }

    // subspace half-problem
    double rho_a = cfg.rho_subspace;
    if (rho_a <= 0.0) {
      const double l = estimate_lipschitz(subspace_normal_op(basis, spec),
                                          cfg.power_iters,
                                          cfg.seed + 2 * it + 1);
      rho_a = l > 0.0 ? 0.9 / l : 0.0;
    }
    subspace = gd_step_subspace(subspace, basis, y, spec, rho_a);
    if (cfg.prox_subspace == Prox::qr_orthonormalize)
      throw InvalidArgument(
          "solve_alternating: qr prox applies to the basis only");
    subspace = prox_apply(cfg.prox_subspace, cfg.lambda_subspace * rho_a,
                          subspace, h, w, nullptr, cfg.tv_iters, cfg.threads);

    if (!basis.allFinite() || !subspace.allFinite())
      throw SolveDiverged("solve_alternating: non-finite iterate at iteration " +
                              std::to_string(it),
                          trace);

    const double rn = residual_norm(subspace, basis);
    TraceRecord rec;
    rec.iter = it;
    rec.objective = 0.5 * rn * rn;
    rec.rel_residual = ynorm > 0.0 ? rn / ynorm : 0.0;
    rec.seconds = elapsed();
    trace.records.push_back(rec);

    if (rec.rel_residual < cfg.tol) {
      res.converged = true;
      break;
    }
  }

  res.basis = std::move(basis);
  res.subspace = std::move(subspace);
  res.cube = lowrank::compose(res.subspace, res.basis, h, w);
  res.trace = std::move(trace);
  return res;
}

} // namespace lrsci::solver
