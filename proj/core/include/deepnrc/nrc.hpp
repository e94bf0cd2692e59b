// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Layer-wise regression collapse metrics.
//
//   NRC1  noise component   1 - Tr(U^T S U) / Tr(S), U = top-k eigenvectors of
//                           the feature covariance S
//   NRC2  signal-target     linear CKA between H projected on U and Y
//   NRC3  feature-weight    mean principal-angle cosine between the top-k
//                           feature subspace and the top-k input subspace of W
//   NRC4  predictability    (1/N) ||H H^+ Y - Y||_F^2
//
// Features are always centered before any subspace is extracted.

#pragma once

#include "deepnrc/linalg.hpp"
#include "deepnrc/nn.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace deepnrc::nrc {

using linalg::DenseMatrix;
using linalg::Index;

enum class Centering { centered, uncentered };

/// Which features NRC3 pairs with W^l.
///   previous_layer: top-k subspace of H^{l-1} vs W^l, reported at layer l.
///   same_layer:     top-k subspace of H^l vs W^{l+1}, reported at layer l.
enum class Nrc3Convention { previous_layer, same_layer };

inline constexpr double kDefaultTau = 0.05;

struct Prop1Certificate {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double lhs = 0.0;    // ||H - P_Y H||_F / ||H||_F on centered data
  double bound = 0.0;  // sqrt(epsilon1) + sqrt(epsilon2)
  bool holds = false;  // lhs <= bound + 1e-9
  double energy_spread = 0.0;  // sigma_k / sigma_1 of the top-k signal part
};

struct LayerMetrics {
  std::size_t layer_index = 0;
  double nrc1_noise = 0.0;
  std::optional<double> nrc2_cka;        // empty for zero-variance features
  std::optional<double> nrc3_alignment;  // empty where no (features, weight) pair exists
  double nrc4_mse = 0.0;
  std::optional<double> stable_rank_H;
  std::optional<double> stable_rank_W;
  bool eigen_tie_flag = false;
  bool degenerate = false;  // features have zero variance
  std::optional<Prop1Certificate> certificate;
};

struct CollapseReport {
  std::vector<LayerMetrics> layers;  // hidden layers 1 .. L-1
  std::optional<double> output_nrc3;  // W^L against H^{L-1} (previous_layer convention)
  std::optional<double> output_stable_rank_W;
  double model_train_mse = 0.0;
  double target_stable_rank = 0.0;
  std::optional<std::size_t> first_collapsed_layer;
  Index subspace_dim = 0;
  double tau = kDefaultTau;
  std::size_t epoch = 0;
};

struct LowRankMetrics {
  std::size_t layer_index = 0;
  double rank_r_noise = 0.0;
  std::optional<double> signal_alignment;
  std::optional<double> noise_alignment;
  std::optional<double> stable_rank_H;
};

struct SignalNoiseAlignment {
  double signal = 0.0;
  double noise = 0.0;
};

struct MetricOptions {
  std::optional<Index> k;  // defaults to the target dimension t
  double tau = kDefaultTau;
  Centering nrc4_centering = Centering::centered;
  Nrc3Convention nrc3_convention = Nrc3Convention::previous_layer;
  bool nrc3_include_input = false;  // pair X with W^1 at layer 1
  double rcond = linalg::kDefaultRcond;
};

/// NRC1. Zero-variance features give 0.
double nrc1_noise_component(const DenseMatrix& h, Index k);

/// NRC2. Throws UndefinedCkaError for degenerate features or targets.
double nrc2_cka(const DenseMatrix& h, Index k, const DenseMatrix& y);

/// NRC3 for features H^{l-1} (N x h_in) feeding W^l (h_out x h_in).
double nrc3_alignment(const DenseMatrix& h_prev, const DenseMatrix& w, Index k);

/// NRC4. In centered mode both H and Y are centered first, which is the
/// same as fitting an intercept.
double nrc4_linear_mse(const DenseMatrix& h, const DenseMatrix& y,
                       Centering centering = Centering::centered,
                       double rcond = linalg::kDefaultRcond);

/// NRC1 measured with the intrinsic rank r instead of t.
double lowrank_noise_component(const DenseMatrix& h, Index r);

/// Mean principal-angle cosines of the top-r input subspace of W against the
/// top-r feature eigenspace (signal) and against its orthogonal complement
/// (noise, min(r, h - r) angles).
SignalNoiseAlignment signal_noise_weight_alignment(const DenseMatrix& h_prev,
                                                   const DenseMatrix& w, Index r);

/// Smallest 1-based l such that nrc1[j] < tau for every j >= l.
std::optional<std::size_t> detect_first_collapsed(std::span<const double> nrc1, double tau);

Prop1Certificate proposition1_certificate(const DenseMatrix& h, const DenseMatrix& y, Index k);

/// H = W^+ Y + (I - W^+ W) Z with W (t x h), Y (t x N), Z (h x N):
/// every zero-regularization minimizer of ||W H - Y||_F.
DenseMatrix ufm_solution(const DenseMatrix& w, const DenseMatrix& y, const DenseMatrix& z);

/// Every metric for every hidden layer of one snapshot.
CollapseReport full_report(const nn::ActivationTrace& trace, const nn::MlpParameters& params,
                           const DenseMatrix& y, const MetricOptions& options,
                           double model_train_mse, std::size_t epoch = 0);

/// Low-rank variants for every hidden layer; alignments follow `convention`.
std::vector<LowRankMetrics> lowrank_report(
    const nn::ActivationTrace& trace, const nn::MlpParameters& params, Index r,
    Nrc3Convention convention = Nrc3Convention::previous_layer);

}  // namespace deepnrc::nrc
