// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/nrc.hpp"

#include "deepnrc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace deepnrc::nrc {

using linalg::OrthonormalBasis;
using linalg::SvdFactorization;
using linalg::Vector;

namespace {

/// One SVD of the (optionally centered) features, shared by every metric
/// that needs the feature spectrum or its eigenvectors.
class FeatureAnalysis {
 public:
  explicit FeatureAnalysis(const DenseMatrix& h, Centering centering = Centering::centered)
      : features_(centering == Centering::centered ? linalg::center_columns(h) : h) {
    if (features_.rows() < 2) throw ShapeError("collapse metrics need at least two samples");
    degenerate_ = features_.cwiseAbs().maxCoeff() == 0.0;
    if (!degenerate_) {
      svd_ = linalg::svd(features_);
      // Centering a constant matrix can leave rounding residue; treat a
      // relative spectrum at that level as zero variance.
      degenerate_ = svd_.singular_values(0) <= 1e-13 * h.norm();
    }
  }

  const DenseMatrix& features() const noexcept { return features_; }
  const SvdFactorization& svd() const noexcept { return svd_; }
  bool degenerate() const noexcept { return degenerate_; }
  Index width() const noexcept { return features_.cols(); }

  void require_k(Index k, const char* op) const {
    if (k < 1 || k > width()) {
      throw ShapeError(fmt::format("{}: k = {} outside [1, {}]", op, k, width()));
    }
  }

  /// Fraction of covariance trace outside the top-k eigenspace, summed from
  /// the tail of the spectrum.
  double noise_fraction(Index k) const {
    require_k(k, "noise component");
    if (degenerate_) return 0.0;
    const Vector& s = svd_.singular_values;
    const double total = s.squaredNorm();
    if (k >= s.size()) return 0.0;
    return std::clamp(s.tail(s.size() - k).squaredNorm() / total, 0.0, 1.0);
  }

  OrthonormalBasis top(Index k) const {
    require_k(k, "feature eigenspace");
    if (k <= svd_.right.cols()) return linalg::leading_right_vectors(svd_, k);
    return linalg::top_cov_eigenspace(features_, k);
  }

  /// Coordinates of the top-k signal part in its own eigenbasis, H_c V_k.
  DenseMatrix signal_coordinates(Index k) const {
    const Index kk = std::min<Index>(k, svd_.singular_values.size());
    return svd_.left.leftCols(kk) * svd_.singular_values.head(kk).asDiagonal();
  }

  bool tie_at(Index k) const { return !degenerate_ && linalg::has_tie_at(svd_.singular_values, k); }

  std::optional<double> stable_rank() const {
    if (degenerate_) return std::nullopt;
    return linalg::stable_rank_from_spectrum(svd_.singular_values);
  }

 private:
  DenseMatrix features_;
  SvdFactorization svd_;
  bool degenerate_ = false;
};

double mean(const Vector& v) { return v.size() == 0 ? 0.0 : v.mean(); }

double cka_of(const FeatureAnalysis& a, Index k, const DenseMatrix& y) {
  a.require_k(k, "nrc2_cka");
  if (a.degenerate()) throw UndefinedCkaError("nrc2_cka: features have zero variance");
  return linalg::linear_cka(a.signal_coordinates(k), y);
}

double alignment_of(const FeatureAnalysis& prev, const DenseMatrix& w, Index k) {
  if (w.cols() != prev.width()) {
    throw ShapeError(fmt::format("nrc3_alignment: W has {} inputs, features have {} columns",
                                 w.cols(), prev.width()));
  }
  if (k < 1 || k > prev.width() || k > std::min(w.rows(), w.cols())) {
    throw ShapeError(fmt::format("nrc3_alignment: k = {} exceeds W {}x{} or feature width {}", k,
                                 w.rows(), w.cols(), prev.width()));
  }
  return mean(linalg::principal_angle_cosines(prev.top(k), linalg::top_input_subspace(w, k)));
}

std::optional<double> maybe_alignment(const FeatureAnalysis& prev, const DenseMatrix& w,
                                      Index k) {
  if (prev.degenerate() || w.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
  return alignment_of(prev, w, k);
}

double nrc4_of(const FeatureAnalysis& a, const DenseMatrix& y, Centering centering,
               double rcond) {
  if (y.rows() != a.features().rows()) {
    throw ShapeError(fmt::format("nrc4_linear_mse: {} feature rows vs {} target rows",
                                 a.features().rows(), y.rows()));
  }
  const DenseMatrix target = centering == Centering::centered ? linalg::center_columns(y) : y;
  const double n = static_cast<double>(target.rows());
  if (a.degenerate()) return target.squaredNorm() / n;
  const auto fit = linalg::least_squares_pinv(a.svd(), target, rcond);
  return (a.features() * fit.coefficients - target).squaredNorm() / n;
}

Prop1Certificate certificate_of(const FeatureAnalysis& a, const DenseMatrix& y, Index k) {
  if (y.rows() != a.features().rows()) {
    throw ShapeError("proposition1_certificate: feature and target rows differ");
  }
  Prop1Certificate c;
  c.epsilon1 = a.noise_fraction(k);
  c.epsilon2 = std::max(0.0, 1.0 - cka_of(a, k, y));
  const DenseMatrix yc = linalg::center_columns(y);
  const auto ysvd = linalg::svd(yc);
  Index rank = 0;
  while (rank < ysvd.singular_values.size() &&
         ysvd.singular_values(rank) > 1e-12 * ysvd.singular_values(0)) {
    ++rank;
  }
  if (rank == 0) throw UndefinedCkaError("proposition1_certificate: targets have zero variance");
  const auto q = ysvd.left.leftCols(rank);
  const DenseMatrix& hc = a.features();
  const DenseMatrix residual = hc - q * (q.transpose() * hc);
  c.lhs = residual.norm() / hc.norm();
  c.bound = std::sqrt(c.epsilon1) + std::sqrt(c.epsilon2);
  c.holds = c.lhs <= c.bound + 1e-9;
  const Vector& s = a.svd().singular_values;
  c.energy_spread = k <= s.size() ? s(k - 1) / s(0) : 0.0;
  return c;
}

}  // namespace

double nrc1_noise_component(const DenseMatrix& h, Index k) {
  return FeatureAnalysis(h).noise_fraction(k);
}

double lowrank_noise_component(const DenseMatrix& h, Index r) {
  return nrc1_noise_component(h, r);
}

double nrc2_cka(const DenseMatrix& h, Index k, const DenseMatrix& y) {
  if (h.rows() != y.rows()) {
    throw ShapeError(fmt::format("nrc2_cka: {} feature rows vs {} target rows", h.rows(), y.rows()));
  }
  return cka_of(FeatureAnalysis(h), k, y);
}

double nrc3_alignment(const DenseMatrix& h_prev, const DenseMatrix& w, Index k) {
  const FeatureAnalysis prev(h_prev);
  if (prev.degenerate()) throw NumericalError("nrc3_alignment: features have zero variance");
  return alignment_of(prev, w, k);
}

double nrc4_linear_mse(const DenseMatrix& h, const DenseMatrix& y, Centering centering,
                       double rcond) {
  return nrc4_of(FeatureAnalysis(h, centering), y, centering, rcond);
}

SignalNoiseAlignment signal_noise_weight_alignment(const DenseMatrix& h_prev,
                                                   const DenseMatrix& w, Index r) {
  const FeatureAnalysis prev(h_prev);
  if (r < 1 || r >= prev.width()) {
    throw ShapeError(fmt::format("signal_noise_weight_alignment: r = {} outside [1, {})", r,
                                 prev.width()));
  }
  if (w.cols() != prev.width() || r > std::min(w.rows(), w.cols())) {
    throw ShapeError(fmt::format("signal_noise_weight_alignment: W {}x{} vs width {}, r = {}",
                                 w.rows(), w.cols(), prev.width(), r));
  }
  if (prev.degenerate()) {
    throw NumericalError("signal_noise_weight_alignment: features have zero variance");
  }
  const OrthonormalBasis signal = prev.top(r);
  const OrthonormalBasis weight = linalg::top_input_subspace(w, r);
  const OrthonormalBasis noise = linalg::orthogonal_complement(signal);
  return {mean(linalg::principal_angle_cosines(weight, signal)),
          mean(linalg::principal_angle_cosines(weight, noise))};
}

std::optional<std::size_t> detect_first_collapsed(std::span<const double> nrc1, double tau) {
  std::optional<std::size_t> first;
  for (std::size_t i = nrc1.size(); i-- > 0;) {
    if (!(nrc1[i] < tau)) break;
    first = i + 1;
  }
  return first;
}

Prop1Certificate proposition1_certificate(const DenseMatrix& h, const DenseMatrix& y, Index k) {
  const FeatureAnalysis a(h);
  if (a.degenerate()) throw NumericalError("proposition1_certificate: features have zero variance");
  return certificate_of(a, y, k);
}

DenseMatrix ufm_solution(const DenseMatrix& w, const DenseMatrix& y, const DenseMatrix& z) {
  if (y.rows() != w.rows() || z.rows() != w.cols() || y.cols() != z.cols()) {
    throw ShapeError(fmt::format("ufm_solution: W {}x{}, Y {}x{}, Z {}x{} do not chain", w.rows(),
                                 w.cols(), y.rows(), y.cols(), z.rows(), z.cols()));
  }
  const DenseMatrix pinv =
      linalg::least_squares_pinv(w, DenseMatrix::Identity(w.rows(), w.rows())).coefficients;
  return pinv * y + z - pinv * (w * z);
}

CollapseReport full_report(const nn::ActivationTrace& trace, const nn::MlpParameters& params,
                           const DenseMatrix& y, const MetricOptions& options,
                           double model_train_mse, std::size_t epoch) {
  const std::size_t depth = params.layers.size();
  if (trace.hidden.size() + 1 != depth) {
    throw ShapeError(fmt::format("full_report: trace has {} hidden layers, network depth {}",
                                 trace.hidden.size(), depth));
  }
  if (y.rows() != trace.input.rows()) {
    throw ShapeError("full_report: targets and trace have different sample counts");
  }
  CollapseReport report;
  report.subspace_dim = options.k.value_or(y.cols());
  report.tau = options.tau;
  report.epoch = epoch;
  report.model_train_mse = model_train_mse;
  report.target_stable_rank = linalg::stable_rank(linalg::center_columns(y));
  const Index k = report.subspace_dim;

  const auto weight_rank = [](const DenseMatrix& w) -> std::optional<double> {
    if (w.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
    return linalg::stable_rank(w);
  };

  std::vector<FeatureAnalysis> analyses;
  analyses.reserve(depth);
  analyses.emplace_back(trace.input);
  for (const auto& h : trace.hidden) analyses.emplace_back(h);

  for (std::size_t l = 1; l < depth; ++l) {
    const FeatureAnalysis& a = analyses[l];
    LayerMetrics m;
    m.layer_index = l;
    m.degenerate = a.degenerate();
    m.nrc1_noise = a.noise_fraction(k);
    m.eigen_tie_flag = a.tie_at(k);
    m.stable_rank_H = a.stable_rank();
    m.stable_rank_W = weight_rank(params.layers[l - 1].weight);
    if (!a.degenerate()) {
      m.nrc2_cka = cka_of(a, k, y);
      m.certificate = certificate_of(a, y, k);
    }
    if (options.nrc4_centering == Centering::centered) {
      m.nrc4_mse = nrc4_of(a, y, Centering::centered, options.rcond);
    } else {
      m.nrc4_mse = nrc4_of(FeatureAnalysis(trace.hidden[l - 1], Centering::uncentered), y,
                           Centering::uncentered, options.rcond);
    }
    if (options.nrc3_convention == Nrc3Convention::previous_layer) {
      if (l >= 2 || options.nrc3_include_input) {
        m.nrc3_alignment = maybe_alignment(analyses[l - 1], params.layers[l - 1].weight, k);
      }
    } else {
      m.nrc3_alignment = maybe_alignment(a, params.layers[l].weight, k);
    }
    report.layers.push_back(std::move(m));
  }
  report.output_stable_rank_W = weight_rank(params.layers.back().weight);
  if (options.nrc3_convention == Nrc3Convention::previous_layer &&
      (depth >= 2 || options.nrc3_include_input)) {
    report.output_nrc3 = maybe_alignment(analyses[depth - 1], params.layers.back().weight, k);
  }

  std::vector<double> nrc1;
  for (const auto& m : report.layers) nrc1.push_back(m.nrc1_noise);
  report.first_collapsed_layer = detect_first_collapsed(nrc1, options.tau);
  return report;
}

std::vector<LowRankMetrics> lowrank_report(const nn::ActivationTrace& trace,
                                           const nn::MlpParameters& params, Index r,
                                           Nrc3Convention convention) {
  const std::size_t depth = params.layers.size();
  if (trace.hidden.size() + 1 != depth) {
    throw ShapeError("lowrank_report: trace does not match network depth");
  }
  std::vector<FeatureAnalysis> analyses;
  analyses.emplace_back(trace.input);
  for (const auto& h : trace.hidden) analyses.emplace_back(h);

  const auto pair = [&](const FeatureAnalysis& feats, const DenseMatrix& w,
                        LowRankMetrics& out) {
    if (feats.degenerate() || r >= feats.width() || r > std::min(w.rows(), w.cols()) ||
        w.cwiseAbs().maxCoeff() == 0.0) {
      return;
    }
    const OrthonormalBasis signal = feats.top(r);
    const OrthonormalBasis weight = linalg::top_input_subspace(w, r);
    out.signal_alignment = mean(linalg::principal_angle_cosines(weight, signal));
    out.noise_alignment =
        mean(linalg::principal_angle_cosines(weight, linalg::orthogonal_complement(signal)));
  };

  std::vector<LowRankMetrics> out;
  for (std::size_t l = 1; l < depth; ++l) {
    LowRankMetrics m;
    m.layer_index = l;
    m.rank_r_noise = analyses[l].noise_fraction(r);
    m.stable_rank_H = analyses[l].stable_rank();
    if (convention == Nrc3Convention::previous_layer) {
      if (l >= 2) pair(analyses[l - 1], params.layers[l - 1].weight, m);
    } else {
      pair(analyses[l], params.layers[l].weight, m);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace deepnrc::nrc
