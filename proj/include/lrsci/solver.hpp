#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrsci/prox.hpp"
#include "lrsci/types.hpp"

namespace lrsci::solver {

struct SolverConfig {
  int rank = 3;
  int max_iters = 100;
  // step sizes; values <= 0 mean "auto" (0.9 / power-iteration estimate,
  // re-estimated per half-problem every iteration)
  double rho_basis = 0.0;
  double rho_subspace = 0.0;
  Prox prox_basis = Prox::qr_orthonormalize;
  Prox prox_subspace = Prox::identity;
  double lambda_basis = 0.0;
  double lambda_subspace = 0.0;
  double tol = 1e-6; // relative-residual early stop
  std::uint64_t seed = 0;
  int power_iters = 50;
  int tv_iters = 30;
  int threads = 1;

  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;    // 1/2 ||y - Phi vec(A E^T)||^2
  double rel_residual = 0.0; // ||y - Phi vec(A E^T)|| / ||y||
  double seconds = 0.0;      // wall time since solve start
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  std::vector<std::string> header; // echoed configuration lines

  void write_csv(std::ostream &os) const;
};

/// NaN/Inf was detected in the iterates; carries the partial trace.
class SolveDiverged : public Diverged {
public:
  SolveDiverged(const std::string &msg, SolveTrace t)
      : Diverged(msg), trace(std::move(t)) {}
  SolveTrace trace;
};

struct InitFactors {
  MatrixXd basis;    // B x k, orthonormal
  MatrixXd subspace; // HW x k
  bool degenerate = false; // all-zero measurement fallback
};

/// Physics-based initialization: adjoint back-projection with per-band
/// energy normalization (band mean set to mean(y)/B), then truncated SVD.
/// An all-zero measurement yields zero subspace, an arbitrary orthonormal
/// basis and the degenerate flag.
InitFactors init_classical(const Measurement &y, const SensingSpec &spec,
                           int k);

/// Self-adjoint positive operator v -> Op^T(Op(v)) on matrix-shaped
/// iterates, for power iteration.
struct NormalOp {
  Eigen::Index rows = 0, cols = 0;
  std::function<MatrixXd(const MatrixXd &)> apply;
};

NormalOp basis_normal_op(const MatrixXd &subspace, const SensingSpec &spec);
NormalOp subspace_normal_op(const MatrixXd &basis, const SensingSpec &spec);

/// Largest-eigenvalue estimate of the normal operator (the gradient
/// Lipschitz constant) by power iteration; Rayleigh quotients ascend, so
/// the estimate approaches the true value from below. A zero operator
/// returns 0 and the caller must treat the problem as degenerate.
double estimate_lipschitz(const NormalOp &op, int iters, std::uint64_t seed);

/// One gradient-descent step plus the intermediates the unfolded network
/// needs for its backward pass (the network reuses this exact code path,
/// so the physical feature update equals the classical step bit for bit).
struct GdStepDetail {
  MatrixXd value; // updated factor
  MatrixXd z;     // adjoint of the residual, HW x B
  MatrixXd g;     // materialized gradient matrix
};

GdStepDetail gd_step_basis_detail(const MatrixXd &basis,
                                  const MatrixXd &subspace,
                                  const Measurement &y,
                                  const SensingSpec &spec, double rho);
GdStepDetail gd_step_subspace_detail(const MatrixXd &subspace,
                                     const MatrixXd &basis,
                                     const Measurement &y,
                                     const SensingSpec &spec, double rho);

/// One gradient-descent step on the basis quadratic:
/// E - rho * grad_basis(forward_lowrank(A, E) - y, A).
MatrixXd gd_step_basis(const MatrixXd &basis, const MatrixXd &subspace,
                       const Measurement &y, const SensingSpec &spec,
                       double rho);

/// One gradient-descent step on the subspace quadratic.
MatrixXd gd_step_subspace(const MatrixXd &subspace, const MatrixXd &basis,
                          const Measurement &y, const SensingSpec &spec,
                          double rho);

struct SolveResult {
  MatrixXd basis;
  MatrixXd subspace;
  HsiCube cube;
  SolveTrace trace;
  bool converged = false;  // stopped early below tol
  bool degenerate_init = false;
};

/// Alternating proximal gradient descent: per iteration a basis GD step +
/// prox, then a subspace GD step + prox. With prox_basis =
/// qr_orthonormalize the subspace is compensated so the composed cube is
/// preserved. Stops early when the relative residual drops below tol.
SolveResult solve_alternating(const Measurement &y, const SensingSpec &spec,
                              const SolverConfig &cfg);

} // namespace lrsci::solver
