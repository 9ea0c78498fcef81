#pragma once

#include "mister/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace mister {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Full decomposition m = U diag(singulars) V^T.
template <typename Scalar>
struct SvdResult {
  MatrixX<Scalar> U;
  VectorX<Scalar> singulars;
  MatrixX<Scalar> V;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* where) {
  if (!m.allFinite()) throw Error(std::string(where) + ": non-finite input");
}

// Flips each column so its largest-magnitude entry is positive.
template <typename Scalar>
void fix_sign(MatrixX<Scalar>& V, MatrixX<Scalar>* U, Eigen::Index paired) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    Eigen::Index at = 0;
    V.col(j).cwiseAbs().maxCoeff(&at);
    if (V(at, j) < Scalar(0)) {
      V.col(j) = -V.col(j);
      if (U && j < paired) U->col(j) = -U->col(j);
    }
  }
}

}  // namespace detail

/// Full SVD backed by two-sided Jacobi. The largest-magnitude entry of each
/// right singular vector is made positive.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(m, "svd");
  Eigen::JacobiSVD<MatrixX<Scalar>> solver(m.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult<Scalar> out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  detail::fix_sign(out.V, &out.U, out.singulars.size());
  return out;
}

/// Top-k right singular vectors of a (centred) sample matrix, one sample per
/// row, as an n x k matrix. Works on the smaller of the two Gram matrices and
/// drops directions whose singular value vanishes, so fewer than k columns may
/// come back for rank-deficient input.
template <typename Derived>
MatrixX<typename Derived::Scalar> principal_axes(const Eigen::MatrixBase<Derived>& samples, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(samples, "principal_axes");
  const Eigen::Index rows = samples.rows(), cols = samples.cols();
  if (k < 1 || k > cols) throw Error("principal_axes: k out of range");
  const MatrixX<Scalar> y = samples;
  const bool wide = rows < cols;
  const MatrixX<Scalar> gram = wide ? MatrixX<Scalar>(y * y.transpose()) : MatrixX<Scalar>(y.transpose() * y);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(gram);
  const auto& values = eig.eigenvalues();
  const Scalar top = std::max(values(values.size() - 1), Scalar(0));
  const Scalar floor = top * Scalar(1e-12);

  MatrixX<Scalar> axes(cols, k);
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < std::min(k, values.size()); ++j) {
    const Eigen::Index at = values.size() - 1 - j;
    if (!(values(at) > floor)) break;
    if (wide) {
      axes.col(kept) = y.transpose() * eig.eigenvectors().col(at) / std::sqrt(values(at));
      axes.col(kept).normalize();
    } else {
      axes.col(kept) = eig.eigenvectors().col(at);
    }
    ++kept;
  }
  MatrixX<Scalar> out = axes.leftCols(kept);
  detail::fix_sign<Scalar>(out, nullptr, 0);
  return out;
}

/// Sum over the first k columns v of V of <y, v> v.
template <typename DerivedY, typename DerivedV>
VectorX<typename DerivedY::Scalar> project_topk(const Eigen::MatrixBase<DerivedY>& y,
                                                const Eigen::MatrixBase<DerivedV>& V, Eigen::Index k) {
  if (k < 1 || k > V.cols()) throw Error("project_topk: k out of range");
  if (y.size() != V.rows()) throw Error("project_topk: vector length does not match the basis");
  const auto basis = V.leftCols(k);
  return basis * (basis.transpose() * y);
}

template <typename Scalar>
struct RidgeResult {
  VectorX<Scalar> weights;
  bool degenerate = false;  // jitter had to be added to the system
};

/// Minimiser of ||Q w - t||^2 + lambda w^T diag(penalty) w via LDL^T of the
/// normal equations. Systems with a condition estimate above 1e12 get a
/// jitter of 1e-8 trace/K on the diagonal and are flagged.
template <typename DerivedQ, typename DerivedT, typename DerivedP>
RidgeResult<typename DerivedQ::Scalar> ridge_solve(const Eigen::MatrixBase<DerivedQ>& Q,
                                                   const Eigen::MatrixBase<DerivedT>& target,
                                                   typename DerivedQ::Scalar lambda,
                                                   const Eigen::MatrixBase<DerivedP>& penalty) {
  using Scalar = typename DerivedQ::Scalar;
  const Eigen::Index K = Q.cols();
  if (K < 1) throw Error("ridge_solve: empty basis");
  if (target.size() != Q.rows()) throw Error("ridge_solve: target length does not match the basis");
  if (penalty.size() != K) throw Error("ridge_solve: penalty length does not match the basis");
  if (!(lambda >= Scalar(0))) throw Error("ridge_solve: lambda must be nonnegative");

  MatrixX<Scalar> A = Q.transpose() * Q;
  A.diagonal() += lambda * penalty;
  const VectorX<Scalar> rhs = Q.transpose() * target;

  RidgeResult<Scalar> out;
  Eigen::LDLT<MatrixX<Scalar>> ldlt(A);
  // rcond() alone misses exactly zero pivots, so the pivot spread is checked too.
  Scalar rcond = Scalar(0);
  if (ldlt.info() == Eigen::Success) {
    const VectorX<Scalar> d = ldlt.vectorD().cwiseAbs();
    const Scalar spread = d.maxCoeff() > Scalar(0) ? d.minCoeff() / d.maxCoeff() : Scalar(0);
    rcond = std::min(ldlt.rcond(), spread);
  }
  if (!(rcond * Scalar(1e12) > Scalar(1)) || !ldlt.isPositive()) {
    Scalar jitter = Scalar(1e-8) * A.trace() / Scalar(K);
    if (!(jitter > Scalar(0))) jitter = Scalar(1e-8);
    A.diagonal().array() += jitter;
    ldlt.compute(A);
    out.degenerate = true;
  }
  out.weights = ldlt.solve(rhs);
  return out;
}

enum class ThresholdMode {
  single,   // tau_j = alpha / (sigma_hat_j + eps)
  squared,  // tau_j = alpha^2 / (sigma_hat_j + eps)
};

/// Per-singular-value thresholds with sigma_hat_j = sigma_j / side, where side
/// is the patch side (the group has side^2 columns).
template <typename Derived>
VectorX<typename Derived::Scalar> wnnm_thresholds(const Eigen::MatrixBase<Derived>& singulars,
                                                  typename Derived::Scalar alpha, typename Derived::Scalar eps,
                                                  typename Derived::Scalar side,
                                                  ThresholdMode mode = ThresholdMode::single) {
  using Scalar = typename Derived::Scalar;
  const Scalar strength = mode == ThresholdMode::single ? alpha : alpha * alpha;
  VectorX<Scalar> tau(singulars.size());
  for (Eigen::Index j = 0; j < singulars.size(); ++j) tau(j) = strength / (singulars(j) / side + eps);
  for (Eigen::Index j = 1; j < tau.size(); ++j) {
    if (tau(j) < tau(j - 1)) throw Error("wnnm: thresholds must be nondecreasing in the singular value index");
  }
  return tau;
}

template <typename Scalar>
struct WnnmResult {
  MatrixX<Scalar> X;
  VectorX<Scalar> singulars;  // input singular values
  VectorX<Scalar> shrunk;     // max(sigma - tau, 0)
};

/// Weighted singular value soft-thresholding of a centred k x side^2 group.
/// The decomposition goes through the k x k Gram matrix:
/// X_lr = U diag(shrunk / sigma) U^T X.
template <typename Derived>
WnnmResult<typename Derived::Scalar> wnnm_shrink(const Eigen::MatrixBase<Derived>& X, typename Derived::Scalar alpha,
                                                 typename Derived::Scalar eps,
                                                 ThresholdMode mode = ThresholdMode::single) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(X, "wnnm_shrink");
  if (!(alpha >= Scalar(0))) throw Error("wnnm_shrink: alpha must be nonnegative");
  if (!(eps > Scalar(0))) throw Error("wnnm_shrink: eps must be positive");
  const MatrixX<Scalar> x = X;
  const Scalar side = std::sqrt(static_cast<Scalar>(x.cols()));

  const bool wide = x.rows() <= x.cols();
  const MatrixX<Scalar> gram = wide ? MatrixX<Scalar>(x * x.transpose()) : MatrixX<Scalar>(x.transpose() * x);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(gram);
  const Eigen::Index m = gram.rows();
  const Eigen::Index r = std::min(x.rows(), x.cols());

  // Descending singular values with their Gram eigenvectors.
  VectorX<Scalar> sigma(r);
  MatrixX<Scalar> basis(m, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    sigma(j) = std::sqrt(std::max(eig.eigenvalues()(m - 1 - j), Scalar(0)));
    basis.col(j) = eig.eigenvectors().col(m - 1 - j);
  }
  const VectorX<Scalar> tau = wnnm_thresholds(sigma, alpha, eps, side, mode);

  WnnmResult<Scalar> out;
  out.singulars = sigma;
  out.shrunk = (sigma - tau).cwiseMax(Scalar(0));
  if (alpha == Scalar(0)) {
    out.shrunk = sigma;
    out.X = x;
    return out;
  }
  VectorX<Scalar> ratio(r);
  for (Eigen::Index j = 0; j < r; ++j) ratio(j) = sigma(j) > Scalar(0) ? out.shrunk(j) / sigma(j) : Scalar(0);
  const MatrixX<Scalar> filter = basis * ratio.asDiagonal() * basis.transpose();
  out.X = wide ? MatrixX<Scalar>(filter * x) : MatrixX<Scalar>(x * filter);
  return out;
}

}  // namespace mister
