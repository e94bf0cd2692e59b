// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense kernels behind every collapse metric. Matrices hold samples as rows
// (N x features); subspaces live in feature space.

#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace deepnrc::linalg {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kOrthonormalTolerance = 1e-10;
inline constexpr double kDefaultRcond = 1e-12;
inline constexpr double kTieTolerance = 1e-10;

/// Throws NumericalError if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, const char* what);

/// Column subspace of R^ambient_dim, stored as an ambient_dim x k matrix
/// with orthonormal columns. Construction verifies basis^T basis = I_k.
class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(DenseMatrix basis);

  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index subspace_dim() const noexcept { return basis_.cols(); }
  const DenseMatrix& matrix() const noexcept { return basis_; }

 private:
  DenseMatrix basis_;
};

struct SvdFactorization {
  DenseMatrix left;        // rows x p
  Vector singular_values;  // p, nonincreasing
  DenseMatrix right;       // cols x p
};

/// M - 1 mean^T.
DenseMatrix center_columns(const DenseMatrix& m);

/// (1/N) H^T H for a column-centered H. Rejects input whose column means are
/// not zero (norm > 1e-6), since that always indicates a caller bug.
DenseMatrix covariance(const DenseMatrix& centered);

/// Thin SVD with p = min(rows, cols). Each right singular vector is signed so
/// that its largest-magnitude entry is positive; the matching left vector is
/// flipped with it.
SvdFactorization svd(const DenseMatrix& m);

/// True when sigma_k - sigma_{k+1} < 1e-10 sigma_1 (k is 1-based).
bool has_tie_at(const Vector& singular_values, Index k);

/// Top-k right singular vectors of the centered features, i.e. the top-k
/// eigenvectors of their covariance.
OrthonormalBasis top_cov_eigenspace(const DenseMatrix& centered, Index k);

/// Top-k right singular vectors of W (h_out x h_in): the input directions
/// the layer amplifies most.
OrthonormalBasis top_input_subspace(const DenseMatrix& weight, Index k);

/// Basis that together with `basis` spans the ambient space.
OrthonormalBasis orthogonal_complement(const OrthonormalBasis& basis);

/// Leading k columns of a factorization's right vectors as a basis.
OrthonormalBasis leading_right_vectors(const SvdFactorization& f, Index k);

struct LeastSquaresSolution {
  DenseMatrix coefficients;  // cols(H) x cols(Y)
  Index rank = 0;            // singular values kept
  bool degenerate = false;   // H was identically zero
};

/// Minimum-norm least-squares solution H^+ Y through the SVD, discarding
/// singular values below rcond * sigma_max.
LeastSquaresSolution least_squares_pinv(const DenseMatrix& h, const DenseMatrix& y,
                                        double rcond = kDefaultRcond);

/// Same, reusing an existing factorization of H.
LeastSquaresSolution least_squares_pinv(const SvdFactorization& h_svd, const DenseMatrix& y,
                                        double rcond = kDefaultRcond);

/// Linear CKA  ||B_c^T A_c||_F^2 / (||A_c^T A_c||_F ||B_c^T B_c||_F).
/// Throws UndefinedCkaError if either side has zero variance.
double linear_cka(const DenseMatrix& a, const DenseMatrix& b);

/// Cosines of the principal angles between two subspaces, nonincreasing,
/// length min(k1, k2), clamped to [0, 1].
Vector principal_angle_cosines(const OrthonormalBasis& u1, const OrthonormalBasis& u2);

/// ||M||_F^2 / sigma_max(M)^2. Throws on the zero matrix.
double stable_rank(const DenseMatrix& m);

/// Stable rank from an already computed spectrum.
double stable_rank_from_spectrum(const Vector& singular_values);

}  // namespace deepnrc::linalg
