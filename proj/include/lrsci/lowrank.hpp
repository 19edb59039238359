#pragma once

#include "lrsci/types.hpp"

namespace lrsci::lowrank {

// Factor conventions used everywhere below:
//   basis     E, B x k, columns are basis spectra
//   subspace  A, HW x k, column j reshapes to the j-th coefficient image
// The composed cube has matricization X = A * E^T (HW x B), i.e. the
// mode-3 product of the coefficient stack with E.

/// X = subspace * basis^T folded to an H x W x B cube.
HsiCube compose(const MatrixXd &subspace, const MatrixXd &basis, int height,
                int width);

struct Factors {
  MatrixXd basis;    // B x k, orthonormal columns
  MatrixXd subspace; // HW x k
};

/// Best rank-k factorization of the cube's band matricization.
/// basis = top-k eigenvectors of the B x B Gram (small side), with a
/// deterministic sign fix; subspace = X * basis.
Factors decompose_truncated_svd(const HsiCube &x, int k);

/// Measurement of the composed cube: one code path serves both derived
/// sensing operators (basis model and subspace model).
Measurement forward_lowrank(const MatrixXd &subspace, const MatrixXd &basis,
                            const SensingSpec &spec);

/// Gradient of 1/2 ||y - Phi_A e||^2 with respect to the basis,
/// materialized as the B x k matrix Z^T * A with Z = adjoint(residual).
/// The residual convention is r = Phi_A e - y.
MatrixXd grad_basis(const Measurement &residual, const MatrixXd &subspace,
                    const SensingSpec &spec);

/// Gradient of 1/2 ||y - Phi_E a||^2 with respect to the subspace,
/// materialized as Z * E (HW x k).
MatrixXd grad_subspace(const Measurement &residual, const MatrixXd &basis,
                       const SensingSpec &spec);

/// Dense Phi * (I_B kron A), the sensing matrix of the basis model
/// (HW' x Bk). Oracle only; every dense factor is capped at 1e6 entries.
MatrixXd build_explicit_phi_basis(const MatrixXd &subspace,
                                  const SensingSpec &spec);

/// Dense Phi * (E kron I_HW), the sensing matrix of the subspace model
/// (HW' x HWk). Same caps.
MatrixXd build_explicit_phi_subspace(const MatrixXd &basis,
                                     const SensingSpec &spec);

/// vec(E^T): basis entries grouped band-major, e[(b*k)+j] = E(b,j).
VectorXd vec_basis(const MatrixXd &basis);

/// Product-preserving renormalization: basis' = Q from the sign-fixed
/// thin QR of basis, subspace' = subspace * R^T, so that
/// subspace' * basis'^T == subspace * basis^T to rounding.
Factors renormalize(const MatrixXd &basis, const MatrixXd &subspace);

/// Sign-fixed thin QR, Q factor only (columns orthonormal, R diagonal
/// forced positive). Throws DegenerateInput when rank-deficient.
MatrixXd qr_orthonormalize(const MatrixXd &m);

/// Sign-fixed thin QR returning both factors.
struct QrFactors {
  MatrixXd q, r;
};
QrFactors qr_factor(const MatrixXd &m);

} // namespace lrsci::lowrank
