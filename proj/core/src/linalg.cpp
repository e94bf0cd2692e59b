// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/linalg.hpp"

#include "deepnrc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace deepnrc::linalg {

namespace {

using ColMatrix = Eigen::MatrixXd;

SvdFactorization factorize(const DenseMatrix& m, bool full_right) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ShapeError(fmt::format("svd: empty {}x{} matrix", m.rows(), m.cols()));
  }
  require_finite(m, "svd input");
  const unsigned options =
      Eigen::ComputeThinU | (full_right ? Eigen::ComputeFullV : Eigen::ComputeThinV);
  Eigen::BDCSVD<ColMatrix> solver(ColMatrix(m), options);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(fmt::format("svd: no convergence on {}x{} input", m.rows(), m.cols()));
  }
  SvdFactorization f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  const Index p = f.singular_values.size();
  for (Index j = 0; j < f.right.cols(); ++j) {
    Index pivot = 0;
    f.right.col(j).cwiseAbs().maxCoeff(&pivot);
    if (f.right(pivot, j) < 0.0) {
      f.right.col(j) *= -1.0;
      if (j < p) f.left.col(j) *= -1.0;
    }
  }
  return f;
}

void require_rank_argument(Index k, Index limit, const char* op) {
  if (k < 1 || k > limit) {
    throw ShapeError(fmt::format("{}: subspace dimension {} outside [1, {}]", op, k, limit));
  }
}

}  // namespace

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(fmt::format("{} contains non-finite entries", what));
  }
}

OrthonormalBasis::OrthonormalBasis(DenseMatrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.cols() > basis_.rows()) {
    throw ShapeError(fmt::format("orthonormal basis: {} vectors in dimension {}", basis_.cols(),
                                 basis_.rows()));
  }
  const DenseMatrix gram = basis_.transpose() * basis_;
  const double err =
      (gram - DenseMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalTolerance)) {
    throw NumericalError(fmt::format("orthonormal basis: |B^T B - I| = {:.3e}", err));
  }
}

DenseMatrix center_columns(const DenseMatrix& m) {
  if (m.rows() < 1) throw ShapeError("center_columns: matrix has no rows");
  const Eigen::RowVectorXd mean = m.colwise().mean();
  return m.rowwise() - mean;
}

DenseMatrix covariance(const DenseMatrix& centered) {
  const Index n = centered.rows();
  if (n < 2) throw ShapeError("covariance: need at least two samples");
  const double mean_norm = centered.colwise().mean().norm();
  if (mean_norm > 1e-6) {
    throw NumericalError(
        fmt::format("covariance: input is not column-centered (mean norm {:.3e})", mean_norm));
  }
  DenseMatrix cov = centered.transpose() * centered / static_cast<double>(n);
  // Symmetrize away GEMM rounding.
  return (cov + cov.transpose()) * 0.5;
}

SvdFactorization svd(const DenseMatrix& m) { return factorize(m, false); }

bool has_tie_at(const Vector& s, Index k) {
  if (k < 1 || k >= s.size() || s.size() == 0) return false;
  return s(k - 1) - s(k) < kTieTolerance * s(0);
}

OrthonormalBasis leading_right_vectors(const SvdFactorization& f, Index k) {
  require_rank_argument(k, f.right.cols(), "leading_right_vectors");
  return OrthonormalBasis(f.right.leftCols(k));
}

OrthonormalBasis top_cov_eigenspace(const DenseMatrix& centered, Index k) {
  require_rank_argument(k, centered.cols(), "top_cov_eigenspace");
  const bool need_full = k > std::min(centered.rows(), centered.cols());
  return leading_right_vectors(factorize(centered, need_full), k);
}

OrthonormalBasis top_input_subspace(const DenseMatrix& weight, Index k) {
  require_rank_argument(k, std::min(weight.rows(), weight.cols()), "top_input_subspace");
  return leading_right_vectors(factorize(weight, false), k);
}

OrthonormalBasis orthogonal_complement(const OrthonormalBasis& basis) {
  const Index n = basis.ambient_dim();
  const Index k = basis.subspace_dim();
  if (k == n) throw ShapeError("orthogonal_complement: subspace is the whole space");
  Eigen::HouseholderQR<ColMatrix> qr(ColMatrix(basis.matrix()));
  const ColMatrix q = qr.householderQ() * ColMatrix::Identity(n, n);
  return OrthonormalBasis(q.rightCols(n - k));
}

LeastSquaresSolution least_squares_pinv(const DenseMatrix& h, const DenseMatrix& y,
                                        double rcond) {
  if (h.rows() != y.rows()) {
    throw ShapeError(
        fmt::format("least_squares_pinv: {} feature rows vs {} target rows", h.rows(), y.rows()));
  }
  if (h.size() == 0 || h.cwiseAbs().maxCoeff() == 0.0) {
    LeastSquaresSolution out;
    out.coefficients = DenseMatrix::Zero(h.cols(), y.cols());
    out.degenerate = true;
    return out;
  }
  return least_squares_pinv(svd(h), y, rcond);
}

LeastSquaresSolution least_squares_pinv(const SvdFactorization& f, const DenseMatrix& y,
                                        double rcond) {
  if (f.left.rows() != y.rows()) {
    throw ShapeError(fmt::format("least_squares_pinv: {} feature rows vs {} target rows",
                                 f.left.rows(), y.rows()));
  }
  LeastSquaresSolution out;
  const Index p = f.singular_values.size();
  if (p == 0 || f.singular_values(0) == 0.0) {
    out.coefficients = DenseMatrix::Zero(f.right.rows(), y.cols());
    out.degenerate = true;
    return out;
  }
  const double cutoff = rcond * f.singular_values(0);
  Index r = 0;
  while (r < p && f.singular_values(r) > cutoff) ++r;
  out.rank = r;
  const DenseMatrix uty = f.left.leftCols(r).transpose() * y;
  const Vector inv = f.singular_values.head(r).cwiseInverse();
  out.coefficients = f.right.leftCols(r) * (inv.asDiagonal() * uty);
  return out;
}

double linear_cka(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError(fmt::format("linear_cka: {} vs {} samples", a.rows(), b.rows()));
  }
  const DenseMatrix ac = center_columns(a);
  const DenseMatrix bc = center_columns(b);
  const auto degenerate = [](const DenseMatrix& centered, const DenseMatrix& raw) {
    const double norm = centered.norm();
    return norm == 0.0 || norm <= 1e-12 * raw.norm();
  };
  if (degenerate(ac, a) || degenerate(bc, b)) {
    throw UndefinedCkaError("linear_cka: zero-variance input after centering");
  }
  const double cross = (bc.transpose() * ac).squaredNorm();
  const double self_a = (ac.transpose() * ac).norm();
  const double self_b = (bc.transpose() * bc).norm();
  return std::clamp(cross / (self_a * self_b), 0.0, 1.0);
}

Vector principal_angle_cosines(const OrthonormalBasis& u1, const OrthonormalBasis& u2) {
  if (u1.ambient_dim() != u2.ambient_dim()) {
    throw ShapeError(fmt::format("principal_angle_cosines: ambient dimensions {} and {}",
                                 u1.ambient_dim(), u2.ambient_dim()));
  }
  const ColMatrix cross = u1.matrix().transpose() * u2.matrix();
  Eigen::JacobiSVD<ColMatrix> solver(cross);
  return solver.singularValues().cwiseMax(0.0).cwiseMin(1.0);
}

double stable_rank_from_spectrum(const Vector& s) {
  if (s.size() == 0 || s(0) == 0.0) throw NumericalError("stable_rank: zero matrix");
  return s.squaredNorm() / (s(0) * s(0));
}

double stable_rank(const DenseMatrix& m) {
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("stable_rank: zero matrix");
  }
  const ColMatrix cm = m;
  Eigen::BDCSVD<ColMatrix> solver(cm);
  return stable_rank_from_spectrum(solver.singularValues());
}

}  // namespace deepnrc::linalg
