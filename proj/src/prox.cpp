#include "lrsci/prox.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "lrsci/kernels.hpp"
#include "lrsci/lowrank.hpp"

namespace lrsci::solver {

Prox prox_from_name(std::string_view name) {
  if (name == "identity") return Prox::identity;
  if (name == "soft_threshold" || name == "soft") return Prox::soft_threshold;
  if (name == "tv2d" || name == "tv") return Prox::tv2d;
  if (name == "qr_orthonormalize" || name == "qr")
    return Prox::qr_orthonormalize;
  throw InvalidArgument("unknown proximal operator: " + std::string(name));
}

std::string_view prox_name(Prox p) {
  switch (p) {
  case Prox::identity:
    return "identity";
  case Prox::soft_threshold:
    return "soft_threshold";
  case Prox::tv2d:
    return "tv2d";
  case Prox::qr_orthonormalize:
    return "qr_orthonormalize";
  }
  return "unknown";
}

namespace {

// forward differences with Neumann boundary (last row/col difference = 0)
void gradient2d(const RowMajorMatrixXd &u, RowMajorMatrixXd &gx,
                RowMajorMatrixXd &gy) {
  const Eigen::Index h = u.rows(), w = u.cols();
  gx.setZero(h, w);
  gy.setZero(h, w);
  if (w > 1) gx.leftCols(w - 1) = u.rightCols(w - 1) - u.leftCols(w - 1);
  if (h > 1) gy.topRows(h - 1) = u.bottomRows(h - 1) - u.topRows(h - 1);
}

// negative adjoint of gradient2d
RowMajorMatrixXd divergence2d(const RowMajorMatrixXd &px,
                              const RowMajorMatrixXd &py) {
  const Eigen::Index h = px.rows(), w = px.cols();
  RowMajorMatrixXd div = RowMajorMatrixXd::Zero(h, w);
  if (w > 1) {
    div.leftCols(w - 1) += px.leftCols(w - 1);
    div.rightCols(w - 1) -= px.leftCols(w - 1);
  }
  if (h > 1) {
    div.topRows(h - 1) += py.topRows(h - 1);
    div.bottomRows(h - 1) -= py.topRows(h - 1);
  }
  return div;
}

} // namespace

double total_variation(const RowMajorMatrixXd &f) {
  RowMajorMatrixXd gx, gy;
  gradient2d(f, gx, gy);
  return (gx.array().square() + gy.array().square()).sqrt().sum();
}

RowMajorMatrixXd tv2d_prox(const RowMajorMatrixXd &f, double tau, int iters) {
  if (tau < 0.0) throw InvalidArgument("tv2d_prox: tau must be >= 0");
  if (tau == 0.0) return f;

  const Eigen::Index h = f.rows(), w = f.cols();
  RowMajorMatrixXd px = RowMajorMatrixXd::Zero(h, w);
  RowMajorMatrixXd py = RowMajorMatrixXd::Zero(h, w);
  RowMajorMatrixXd gx, gy;
  const double dt = 0.25; // stable for dt <= 1/4 in 2D

  for (int it = 0; it < iters; ++it) {
    const RowMajorMatrixXd u = divergence2d(px, py) - f / tau;
    gradient2d(u, gx, gy);
    const RowMajorMatrixXd denom =
        1.0 + dt * (gx.array().square() + gy.array().square()).sqrt();
    px = (px + dt * gx).cwiseQuotient(denom);
    py = (py + dt * gy).cwiseQuotient(denom);
  }
  return f - tau * divergence2d(px, py);
}

MatrixXd prox_apply(Prox p, double strength, const MatrixXd &value, int height,
                    int width, MatrixXd *companion, int tv_iters,
                    int threads) {
  switch (p) {
  case Prox::identity:
    return value;

  case Prox::soft_threshold: {
    MatrixXd out(value.rows(), value.cols());
    kernels::soft_threshold(out.data(), value.data(), strength,
                            static_cast<std::size_t>(value.size()));
    return out;
  }

  case Prox::tv2d: {
    if (static_cast<Eigen::Index>(height) * width != value.rows())
      throw InvalidArgument("prox_apply(tv2d): H*W != value rows");
    MatrixXd out(value.rows(), value.cols());
    const int k = static_cast<int>(value.cols());
    auto run = [&](int j) {
      Eigen::Map<const RowMajorMatrixXd> plane(value.col(j).data(), height,
                                               width);
      Eigen::Map<RowMajorMatrixXd> res(out.col(j).data(), height, width);
      res = tv2d_prox(plane, strength, tv_iters);
    };
    if (threads <= 1 || k == 1) {
      for (int j = 0; j < k; ++j) run(j);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      const int nt = std::min(threads, k);
      for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
          for (int j = next.fetch_add(1); j < k; j = next.fetch_add(1)) run(j);
        });
      for (auto &th : pool) th.join();
    }
    return out;
  }

  case Prox::qr_orthonormalize: {
    if (companion == nullptr)
      throw InvalidArgument(
          "prox_apply(qr_orthonormalize): companion factor required");
    const auto f = lowrank::renormalize(value, *companion);
    *companion = f.subspace;
    return f.basis;
  }
  }
  throw InvalidArgument("prox_apply: unknown operator");
}

} // namespace lrsci::solver
