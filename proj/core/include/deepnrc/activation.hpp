// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <string_view>

namespace deepnrc {

enum class Activation { relu, tanh };

constexpr std::string_view to_string(Activation a) noexcept {
  return a == Activation::relu ? "relu" : "tanh";
}

constexpr std::optional<Activation> parse_activation(std::string_view s) noexcept {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  return std::nullopt;
}

/// Applies the nonlinearity in place to every coefficient of an Eigen expression.
template <typename Derived>
void apply_activation(Activation a, Derived& m) {
  if (a == Activation::relu) {
    m = m.cwiseMax(0.0);
  } else {
    m = m.array().tanh().matrix();
  }
}

/// Derivative expressed through the pre-activation `z` (relu'(0) = 0).
inline double activation_derivative(Activation a, double z) noexcept {
  if (a == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace deepnrc
