// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "properties.hpp"

#include "deepnrc/linalg.hpp"
#include "deepnrc/nn.hpp"
#include "deepnrc/nrc.hpp"
#include "generators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace deepnrc::testing {

namespace {

void record(PropertyResult& r, int trial, double err, const char* what) {
  r.worst = std::max(r.worst, err);
  if (!(err <= r.tolerance)) {
    if (r.failures == 0) r.first_failure = fmt::format("trial {}: {} error {:.3e}", trial, what, err);
    ++r.failures;
  }
}

}  // namespace

PropertyResult cka_invariance_property(int trials, std::uint64_t seed) {
  PropertyResult r{"cka_invariance", trials, 0, 0, 0.0, 1e-10, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(5, 60);
    const Index p = g.index(1, 8);
    const Index q = g.index(1, 8);
    const DenseMatrix a = g.normal(n, p);
    const DenseMatrix b = g.normal(n, q);
    const double base = linalg::linear_cka(a, b);
    DenseMatrix shift(n, p);
    const DenseMatrix v = g.normal(1, p) * 10.0;
    for (Index row = 0; row < n; ++row) shift.row(row) = v.row(0);
    const DenseMatrix a2 = g.scale() * a * g.orthogonal(p) + shift;
    const double moved = linalg::linear_cka(a2, b);
    const double sym = linalg::linear_cka(b, a);
    const double self = linalg::linear_cka(a, a2);
    ++r.checked;
    record(r, i, std::abs(moved - base), "transformed vs base");
    record(r, i, std::abs(sym - base) * 100.0, "symmetry (x100)");
    record(r, i, std::abs(self - 1.0), "self alignment");
    if (base < 0.0 || base > 1.0) record(r, i, 1.0, "range");
  }
  return r;
}

PropertyResult pabs_basis_invariance_property(int trials, std::uint64_t seed) {
  PropertyResult r{"pabs_basis_invariance", trials, 0, 0, 0.0, 1e-10, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(2, 20);
    const Index k1 = g.index(1, n);
    const Index k2 = g.index(1, n);
    const DenseMatrix u1 = g.stiefel(n, k1);
    const DenseMatrix u2 = g.stiefel(n, k2);
    const auto c = linalg::principal_angle_cosines(linalg::OrthonormalBasis(u1), linalg::OrthonormalBasis(u2));
    const DenseMatrix m1 = u1 * g.orthogonal(k1);
    const DenseMatrix m2 = u2 * g.orthogonal(k2);
    const auto c2 = linalg::principal_angle_cosines(linalg::OrthonormalBasis(m1), linalg::OrthonormalBasis(m2));
    ++r.checked;
    double err = c.size() == c2.size() ? (c - c2).cwiseAbs().maxCoeff() : 1.0;
    record(r, i, err, "re-mixed basis");
    for (Index j = 0; j < c.size(); ++j) {
      if (c(j) < 0.0 || c(j) > 1.0 || (j > 0 && c(j) > c(j - 1))) record(r, i, 1.0, "range/order");
    }
  }
  return r;
}

PropertyResult nrc_invariance_property(int trials, std::uint64_t seed) {
  PropertyResult r{"nrc_scale_rotation_invariance", trials, 0, 0, 0.0, 1e-9, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(20, 80);
    const Index t = g.index(1, 3);
    const Index h = g.index(t + 2, 12);
    const DenseMatrix y = g.normal(n, t);
    // Planted signal plus noise, so the top-k gap is generic.
    const DenseMatrix h_feat = y * g.normal(t, h) + 0.3 * g.normal(n, h);
    const DenseMatrix w = g.normal(g.index(1, 6), h);
    const Index k = t;
    const double c = g.scale();
    const DenseMatrix q = g.orthogonal(h);

    const double n1 = nrc::nrc1_noise_component(h_feat, k);
    const double n2 = nrc::nrc2_cka(h_feat, k, y);
    const double n3 = nrc::nrc3_alignment(h_feat, w, std::min<Index>(k, w.rows()));
    const double sr = linalg::stable_rank(linalg::center_columns(h_feat));
    const DenseMatrix scaled = c * h_feat;
    const DenseMatrix rotated = h_feat * q;
    ++r.checked;
    record(r, i, std::abs(nrc::nrc1_noise_component(scaled, k) - n1), "nrc1 scale");
    record(r, i, std::abs(nrc::nrc2_cka(scaled, k, y) - n2), "nrc2 scale");
    record(r, i, std::abs(nrc::nrc3_alignment(scaled, w, std::min<Index>(k, w.rows())) - n3), "nrc3 scale");
    record(r, i, std::abs(linalg::stable_rank(linalg::center_columns(scaled)) - sr) / sr, "stable_rank_H scale");
    record(r, i, std::abs(nrc::nrc1_noise_component(rotated, k) - n1), "nrc1 rotation");
    record(r, i, std::abs(nrc::nrc2_cka(rotated, k, y) - n2), "nrc2 rotation");
  }
  return r;
}

PropertyResult proposition1_property(int trials, std::uint64_t seed) {
  PropertyResult r{"proposition1_bound", trials, 0, 0, 0.0, 1e-9, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(40, 200);
    const Index t = g.index(1, 4);
    const Index h = g.index(t + 1, 16);
    const DenseMatrix y = g.normal(n, t);
    // Signal through a scaled isometry (even energy) or a generic map.
    DenseMatrix a = g.coin() ? DenseMatrix(g.stiefel(h, t).transpose() * g.uniform(0.5, 3.0))
                             : g.normal(t, h);
    const double delta = std::pow(10.0, g.uniform(-3.0, 0.0));
    const DenseMatrix feats = y * a + delta * g.normal(n, h);
    const auto cert = nrc::proposition1_certificate(feats, y, t);
    if (!(cert.energy_spread > 0.9)) continue;
    ++r.checked;
    const double violation = std::max(0.0, cert.lhs - cert.bound);
    record(r, i, violation, "lhs - bound");
    if (cert.holds != (cert.lhs <= cert.bound + 1e-9)) record(r, i, 1.0, "holds flag");
  }
  return r;
}

namespace {

double relative_error(double analytic, double numeric) {
  // Floor keeps coordinates with vanishing gradient from being judged on noise.
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-5});
  return std::abs(analytic - numeric) / denom;
}

bool near_relu_kink(const nn::MlpParameters& p, const DenseMatrix& x, double margin) {
  DenseMatrix a = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
    DenseMatrix z = a * p.layers[l].weight.transpose();
    z.rowwise() += p.layers[l].bias.transpose();
    if (z.cwiseAbs().minCoeff() < margin) return true;
    a = z.cwiseMax(0.0);
  }
  return false;
}

}  // namespace

PropertyResult gradient_check_property(int trials, std::uint64_t seed) {
  PropertyResult r{"gradient_check", trials, 0, 0, 0.0, 1e-4, {}};
  Gen g(seed);
  const double eps = 1e-6;
  for (int i = 0; i < trials; ++i) {
    const Activation act = i % 2 == 0 ? Activation::tanh : Activation::relu;
    const Index d = g.index(1, 4);
    const Index t = g.index(1, 3);
    const std::size_t depth = static_cast<std::size_t>(g.index(1, 3));
    std::vector<Index> widths;
    for (std::size_t l = 1; l < depth; ++l) widths.push_back(g.index(1, 6));
    const nn::MlpArchitecture arch{d, widths, t, act};
    nn::MlpParameters p;
    DenseMatrix x;
    for (int attempt = 0;; ++attempt) {
      p = nn::init_params(arch, g.engine()());
      for (auto& layer : p.layers) layer.bias = g.normal(layer.bias.size(), 1) * 0.3;
      x = g.normal(g.index(2, 6), d);
      if (act == Activation::tanh || !near_relu_kink(p, x, 1e-3)) break;
      if (attempt > 50) break;
    }
    if (act == Activation::relu && near_relu_kink(p, x, 1e-3)) continue;
    const DenseMatrix y = g.normal(x.rows(), t);
    const auto grads = nn::backward(p, x, y);
    const auto loss_at = [&](const nn::MlpParameters& q) { return nn::mse_loss(nn::predict(q, x), y); };
    ++r.checked;
    double worst = 0.0;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (Index a = 0; a < p.layers[l].weight.size(); ++a) {
        nn::MlpParameters plus = p, minus = p;
        plus.layers[l].weight.data()[a] += eps;
        minus.layers[l].weight.data()[a] -= eps;
        const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * eps);
        worst = std::max(worst, relative_error(grads.layers[l].weight.data()[a], numeric));
      }
      for (Index a = 0; a < p.layers[l].bias.size(); ++a) {
        nn::MlpParameters plus = p, minus = p;
        plus.layers[l].bias(a) += eps;
        minus.layers[l].bias(a) -= eps;
        const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * eps);
        worst = std::max(worst, relative_error(grads.layers[l].bias(a), numeric));
      }
    }
    record(r, i, worst, act == Activation::tanh ? "tanh max relative" : "relu max relative");
  }
  return r;
}

PropertyResult svd_invariant_property(int trials, std::uint64_t seed) {
  PropertyResult r{"svd_invariants", trials, 0, 0, 0.0, 1e-10, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index rows = g.index(1, 64);
    const Index cols = g.index(1, 64);
    DenseMatrix m = g.normal(rows, cols);
    if (i % 4 == 3) {  // rank-deficient instances
      const Index rank = g.index(1, std::min(rows, cols));
      m = g.normal(rows, rank) * g.normal(rank, cols);
    }
    const auto f = linalg::svd(m);
    ++r.checked;
    const DenseMatrix rec = f.left * f.singular_values.asDiagonal() * f.right.transpose();
    record(r, i, (rec - m).norm() / std::max(m.norm(), 1e-300) * 1e2, "reconstruction (x100)");
    const Index p = f.singular_values.size();
    const DenseMatrix eye = DenseMatrix::Identity(p, p);
    record(r, i, (f.right.transpose() * f.right - eye).cwiseAbs().maxCoeff(), "V^T V");
    // Left vectors are orthonormal wherever the singular value is nonzero.
    Index nz = 0;
    while (nz < p && f.singular_values(nz) > 1e-10 * f.singular_values(0)) ++nz;
    const DenseMatrix ul = f.left.leftCols(nz);
    record(r, i, (ul.transpose() * ul - DenseMatrix::Identity(nz, nz)).cwiseAbs().maxCoeff(), "U^T U");
    for (Index j = 1; j < p; ++j) {
      if (f.singular_values(j) > f.singular_values(j - 1) || f.singular_values(j) < 0.0) {
        record(r, i, 1.0, "ordering");
      }
    }
  }
  return r;
}

PropertyResult least_squares_property(int trials, std::uint64_t seed) {
  PropertyResult r{"least_squares_residual_bound", trials, 0, 0, 0.0, 1e-10, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(2, 40);
    DenseMatrix h = g.normal(n, g.index(1, 10));
    if (g.coin()) h.col(0) = h.col(h.cols() - 1);
    DenseMatrix y = g.normal(n, g.index(1, 4));
    y.rowwise() += 3.0 * g.normal(1, y.cols()).row(0);
    const auto sol = linalg::least_squares_pinv(h, y);
    ++r.checked;
    const double resid = (h * sol.coefficients - y).norm();
    record(r, i, std::max(0.0, resid - y.norm()) / std::max(y.norm(), 1e-300), "residual above ||Y||");
    const DenseMatrix yc = linalg::center_columns(y);
    const double baseline = yc.squaredNorm() / static_cast<double>(n);
    const double mse = nrc::nrc4_linear_mse(h, y);
    record(r, i, std::max(0.0, mse - baseline) / std::max(baseline, 1e-300), "nrc4 above mean predictor");
    if (mse < 0.0) record(r, i, 1.0, "negative nrc4");
  }
  return r;
}

PropertyResult nrc1_monotone_property(int trials, std::uint64_t seed) {
  PropertyResult r{"nrc1_monotone_in_k", trials, 0, 0, 0.0, 1e-10, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index n = g.index(4, 50);
    const Index h = g.index(1, 10);
    const Index rank = g.index(1, std::min(h, n - 1));
    const DenseMatrix feats = g.normal(n, rank) * g.normal(rank, h) + DenseMatrix::Ones(n, 1) * g.normal(1, h);
    ++r.checked;
    double prev = 1.0 + 1e-12;
    for (Index k = 1; k <= h; ++k) {
      const double v = nrc::nrc1_noise_component(feats, k);
      if (v < -1e-12 || v > 1.0 + 1e-12) record(r, i, 1.0, "range");
      record(r, i, std::max(0.0, v - prev), "increase in k");
      prev = v;
      if (k == rank) record(r, i, std::abs(v), "nonzero at k = rank");
    }
  }
  return r;
}

PropertyResult ufm_residual_property(int trials, std::uint64_t seed) {
  PropertyResult r{"ufm_residual", trials, 0, 0, 0.0, 1e-8, {}};
  Gen g(seed);
  for (int i = 0; i < trials; ++i) {
    const Index t = g.index(1, 5);
    const Index h = g.index(t, 20);
    const Index n = g.index(2, 40);
    const DenseMatrix w = g.normal(t, h);
    const DenseMatrix y = g.normal(t, n);
    const DenseMatrix z = g.normal(h, n) * std::pow(10.0, g.uniform(0.0, 3.0));
    const DenseMatrix feats = nrc::ufm_solution(w, y, z);
    ++r.checked;
    record(r, i, (w * feats - y).norm(), "||W H - Y||_F");
  }
  return r;
}

}  // namespace deepnrc::testing
