#pragma once

#include <string_view>

#include "lrsci/types.hpp"

namespace lrsci::solver {

enum class Prox { identity, soft_threshold, tv2d, qr_orthonormalize };

/// Parses a registry name. Accepts the canonical names plus the CLI
/// shorthands "soft", "tv" and "qr". Unknown names throw InvalidArgument.
Prox prox_from_name(std::string_view name);
std::string_view prox_name(Prox p);

/// Isotropic 2D total-variation proximal operator,
/// argmin_u 1/2 ||u - f||^2 + tau TV(u), computed with Chambolle's dual
/// projection iteration (fixed iteration count).
RowMajorMatrixXd tv2d_prox(const RowMajorMatrixXd &f, double tau, int iters);

/// Discrete isotropic total variation (forward differences, Neumann
/// boundary). Used by tests to check that the prox shrinks TV.
double total_variation(const RowMajorMatrixXd &f);

/// Applies a proximal operator to an n x k matrix of optimization
/// variables.
///   identity            unchanged
///   soft_threshold      elementwise shrinkage by `strength`
///   tv2d                each column treated as an h x w image (row-major)
///   qr_orthonormalize   delegates to lowrank::renormalize; `companion`
///                       (the paired subspace/basis factor) is required and
///                       is compensated in place so the product is kept
/// tv2d may evaluate channels concurrently (`threads`); the result does
/// not depend on the schedule.
MatrixXd prox_apply(Prox p, double strength, const MatrixXd &value, int height,
                    int width, MatrixXd *companion = nullptr,
                    int tv_iters = 30, int threads = 1);

} // namespace lrsci::solver
