// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deepnrc/activation.hpp"
#include "deepnrc/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace deepnrc::data {

using linalg::DenseMatrix;
using linalg::Index;

enum class GeneratorKind { linear_lowrank, nonlinear_mlp };

std::string_view to_string(GeneratorKind kind) noexcept;
std::optional<GeneratorKind> parse_generator_kind(std::string_view s) noexcept;

/// Synthetic regression task: X ~ N(0, I_d), Y = f0(X).
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::nonlinear_mlp;
  Index n = 10000;
  Index d = 20;
  Index t = 3;
  Index r = 10;  // rank of the linear map, or hidden width of the teacher network
  std::uint64_t seed = 0;
  Activation activation = Activation::relu;  // teacher nonlinearity
  double weight_scale = 1.0;                 // multiplies the 1/sqrt(fan_in) teacher weights

  void validate() const;
};

/// Where a dataset came from; enough to regenerate or re-verify it.
struct Provenance {
  std::optional<GeneratorSpec> generator;
  std::optional<std::filesystem::path> source_file;
  std::string file_sha256;  // of the source file, empty for generators
  std::string content_sha256;  // of the inputs/targets matrices themselves
  std::string prng;            // generator name, empty for files
  bool target_log_transform = false;
};

struct Dataset {
  DenseMatrix inputs;   // N x d
  DenseMatrix targets;  // N x t
  std::string name;
  std::uint64_t seed = 0;
  Provenance provenance;

  Index samples() const noexcept { return inputs.rows(); }
  Index input_dim() const noexcept { return inputs.cols(); }
  Index target_dim() const noexcept { return targets.cols(); }

  /// Checks rows(inputs) = rows(targets), N >= 2, and finiteness.
  void validate() const;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
  double split_fraction = 0.8;
};

/// n x d standard-normal matrix; a pure function of (n, d, seed).
DenseMatrix gaussian_inputs(Index n, Index d, std::uint64_t seed);

/// Y = X B C with B (d x r) and C (r x t) standard normal.
DenseMatrix linear_lowrank_targets(const DenseMatrix& x, Index t, Index r, std::uint64_t seed);

/// The rank-r coefficient matrix used by linear_lowrank_targets for this seed.
DenseMatrix linear_lowrank_map(Index d, Index t, Index r, std::uint64_t seed);

/// Y = f0(X) for a random teacher network d -> r -> r -> t with the given
/// hidden nonlinearity. Weights are N(0,1) * weight_scale / sqrt(fan_in);
/// biases are N(0,1) / sqrt(fan_in) and ignore weight_scale.
DenseMatrix nonlinear_targets(const DenseMatrix& x, Index t, Index r, std::uint64_t seed,
                              Activation activation = Activation::relu,
                              double weight_scale = 1.0);

/// Inputs and targets for a generator spec, with provenance filled in.
Dataset generate(const GeneratorSpec& spec, std::string name = {});

/// First floor(fraction * N) rows train, the rest test. No shuffling.
SplitDataset split_front(const Dataset& ds, double fraction);

using ColumnRef = std::variant<std::size_t, std::string>;

struct CsvSchema {
  std::vector<ColumnRef> input_columns;
  std::vector<ColumnRef> target_columns;
  bool has_header = true;
  bool target_log_transform = false;
  char delimiter = ',';
};

/// Reads a delimiter-separated numeric table. Errors name the 1-based line.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                 std::string name = {});

/// Writes inputs then targets as one CSV table (full double precision).
void write_csv(const std::filesystem::path& path, const Dataset& ds, char delimiter = ',');

/// Per-column affine map fitted on training inputs.
struct Scaler {
  std::vector<std::size_t> kept_columns;     // indices into the original inputs
  std::vector<std::size_t> dropped_columns;  // constant on the training split
  std::vector<double> mean;
  std::vector<double> stddev;  // population (1/N) standard deviation

  DenseMatrix apply(const DenseMatrix& inputs) const;
};

struct StandardizedSplit {
  SplitDataset split;
  Scaler scaler;
};

/// Fits the scaler on the train inputs only and applies it to both sides.
/// Targets are left untouched. Constant input columns are dropped; an input
/// with every column constant is rejected.
StandardizedSplit standardize(const SplitDataset& split);

/// Writes `<dir>/dataset.bin` (inputs, targets) and the `<dir>/dataset.json`
/// sidecar {name, seed, generator | file_sha256, d, t, N, ...}.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace deepnrc::data
