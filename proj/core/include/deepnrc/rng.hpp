// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deepnrc/linalg.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace deepnrc::rng {

using Engine = std::mt19937_64;

/// Recorded in manifests so a reader knows how to reproduce a stream.
inline constexpr std::string_view kGeneratorName =
    "mt19937_64 seeded via seed_seq{seed_lo, seed_hi, stream}; std::normal_distribution";

/// Independent engine for (seed, stream); distinct streams never share state.
inline Engine make_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return Engine(seq);
}

/// rows x cols matrix of N(0, stddev^2) draws, filled in row-major order.
inline linalg::DenseMatrix normal_matrix(Engine& engine, linalg::Index rows, linalg::Index cols,
                                         double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  linalg::DenseMatrix m(rows, cols);
  for (linalg::Index i = 0; i < rows; ++i)
    for (linalg::Index j = 0; j < cols; ++j) m(i, j) = dist(engine);
  return m;
}

// Stream tags. Keep stable: changing one changes every generated dataset.
inline constexpr std::uint32_t kStreamInputs = 1;
inline constexpr std::uint32_t kStreamTargets = 2;
inline constexpr std::uint32_t kStreamInit = 3;
inline constexpr std::uint32_t kStreamShuffle = 4;

}  // namespace deepnrc::rng
