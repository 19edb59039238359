#include "lrsci/lowrank.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "lrsci/cassi.hpp"

namespace lrsci::lowrank {

namespace {

void require_rank_match(const MatrixXd &subspace, const MatrixXd &basis) {
  if (subspace.cols() != basis.cols())
    throw InvalidArgument("factor rank mismatch: subspace has " +
                          std::to_string(subspace.cols()) + " columns, basis " +
                          std::to_string(basis.cols()));
}

void cap_entries(Eigen::Index rows, Eigen::Index cols, const char *what) {
  if (rows * cols > 1000000)
    throw ResourceLimit(std::string(what) + " exceeds the 1e6-entry cap");
}

} // namespace

HsiCube compose(const MatrixXd &subspace, const MatrixXd &basis, int height,
                int width) {
  require_rank_match(subspace, basis);
  if (subspace.rows() != static_cast<Eigen::Index>(height) * width)
    throw InvalidArgument("compose: subspace rows != H*W");
  HsiCube x(height, width, static_cast<int>(basis.rows()));
  x.as_matrix().noalias() = subspace * basis.transpose();
  return x;
}

Factors decompose_truncated_svd(const HsiCube &x, int k) {
  const int bands = x.bands();
  if (k < 1 || k > bands)
    throw InvalidArgument("decompose_truncated_svd: k must be in [1, B]");

  const auto xm = x.as_matrix(); // HW x B
  const MatrixXd gram = xm.transpose() * xm;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw DegenerateInput("decompose_truncated_svd: eigensolver failed");

  // eigenvalues ascend; take the trailing k columns in descending order
  MatrixXd basis(bands, k);
  for (int j = 0; j < k; ++j)
    basis.col(j) = eig.eigenvectors().col(bands - 1 - j);

  // deterministic sign: largest-magnitude entry of each column positive
  for (int j = 0; j < k; ++j) {
    Eigen::Index imax = 0;
    basis.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis(imax, j) < 0.0) basis.col(j) = -basis.col(j);
  }

  Factors f;
  f.basis = basis;
  f.subspace.noalias() = xm * basis;
  return f;
}

Measurement forward_lowrank(const MatrixXd &subspace, const MatrixXd &basis,
                            const SensingSpec &spec) {
  require_rank_match(subspace, basis);
  return cassi::forward(
      compose(subspace, basis, spec.height(), spec.width()), spec);
}

MatrixXd grad_basis(const Measurement &residual, const MatrixXd &subspace,
                    const SensingSpec &spec) {
  const HsiCube z = cassi::adjoint(residual, spec);
  if (subspace.rows() != z.spatial_size())
    throw InvalidArgument("grad_basis: subspace rows != H*W");
  return z.as_matrix().transpose() * subspace; // B x k
}

MatrixXd grad_subspace(const Measurement &residual, const MatrixXd &basis,
                       const SensingSpec &spec) {
  const HsiCube z = cassi::adjoint(residual, spec);
  if (basis.rows() != z.bands())
    throw InvalidArgument("grad_subspace: basis rows != band count");
  return z.as_matrix() * basis; // HW x k
}

MatrixXd build_explicit_phi_basis(const MatrixXd &subspace,
                                  const SensingSpec &spec) {
  const Eigen::Index hw = subspace.rows();
  const Eigen::Index k = subspace.cols();
  const Eigen::Index bands = spec.bands();
  if (hw != static_cast<Eigen::Index>(spec.height()) * spec.width())
    throw InvalidArgument("build_explicit_phi_basis: subspace rows != H*W");
  cap_entries(hw * bands, bands * k, "I_B kron A");

  const MatrixXd phi = cassi::build_explicit_sensing_matrix(spec);
  cap_entries(phi.rows(), bands * k, "phi_basis");

  MatrixXd kron = MatrixXd::Zero(hw * bands, bands * k);
  for (Eigen::Index b = 0; b < bands; ++b)
    kron.block(b * hw, b * k, hw, k) = subspace;
  return phi * kron;
}

MatrixXd build_explicit_phi_subspace(const MatrixXd &basis,
                                     const SensingSpec &spec) {
  const Eigen::Index bands = basis.rows();
  const Eigen::Index k = basis.cols();
  if (bands != spec.bands())
    throw InvalidArgument("build_explicit_phi_subspace: basis rows != bands");
  const Eigen::Index hw =
      static_cast<Eigen::Index>(spec.height()) * spec.width();
  cap_entries(hw * bands, hw * k, "E kron I_HW");

  const MatrixXd phi = cassi::build_explicit_sensing_matrix(spec);
  cap_entries(phi.rows(), hw * k, "phi_subspace");

  MatrixXd kron = MatrixXd::Zero(hw * bands, hw * k);
  for (Eigen::Index b = 0; b < bands; ++b)
    for (Eigen::Index j = 0; j < k; ++j)
      kron.block(b * hw, j * hw, hw, hw) =
          basis(b, j) * MatrixXd::Identity(hw, hw);
  return phi * kron;
}

VectorXd vec_basis(const MatrixXd &basis) {
  VectorXd e(basis.size());
  const Eigen::Index k = basis.cols();
  for (Eigen::Index b = 0; b < basis.rows(); ++b)
    for (Eigen::Index j = 0; j < k; ++j) e[b * k + j] = basis(b, j);
  return e;
}

QrFactors qr_factor(const MatrixXd &m) {
  if (m.rows() < m.cols())
    throw InvalidArgument("qr_factor: expected rows >= cols");
  Eigen::HouseholderQR<MatrixXd> qr(m);
  const Eigen::Index k = m.cols();
  QrFactors f;
  f.q = qr.householderQ() * MatrixXd::Identity(m.rows(), k);
  f.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  const double rmax = f.r.diagonal().cwiseAbs().maxCoeff();
  if (rmax <= 0.0 || f.r.diagonal().cwiseAbs().minCoeff() < 1e-12 * rmax)
    throw DegenerateInput("qr_factor: rank-deficient input");

  for (Eigen::Index j = 0; j < k; ++j) {
    if (f.r(j, j) < 0.0) {
      f.q.col(j) = -f.q.col(j);
      f.r.row(j) = -f.r.row(j);
    }
  }
  return f;
}

MatrixXd qr_orthonormalize(const MatrixXd &m) { return qr_factor(m).q; }

Factors renormalize(const MatrixXd &basis, const MatrixXd &subspace) {
  require_rank_match(subspace, basis);
  const QrFactors f = qr_factor(basis);
  Factors out;
  out.basis = f.q;
  out.subspace.noalias() = subspace * f.r.transpose();
  return out;
}

} // namespace lrsci::lowrank
