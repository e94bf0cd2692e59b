// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative experiment description (JSON, schema_version 1). Unknown keys
// are rejected; every error names the offending field path.

#pragma once

#include "deepnrc/data.hpp"
#include "deepnrc/nn.hpp"
#include "deepnrc/nrc.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace deepnrc::runner {

inline constexpr int kConfigSchemaVersion = 1;

struct CsvSource {
  std::filesystem::path path;
  data::CsvSchema schema;
};

struct DatasetConfig {
  std::variant<data::GeneratorSpec, CsvSource> source;
  std::string name;
  double split_fraction = 0.8;
  bool standardize = false;
};

/// Depth/width shorthand or explicit hidden widths. input_dim / output_dim
/// are optional and, when given, must agree with the dataset.
struct ArchitectureConfig {
  std::optional<std::size_t> depth;
  std::optional<linalg::Index> width;
  std::optional<std::vector<linalg::Index>> hidden_widths;
  Activation activation = Activation::relu;
  std::optional<linalg::Index> input_dim;
  std::optional<linalg::Index> output_dim;

  std::vector<linalg::Index> resolved_hidden_widths() const;
};

enum class MetricSplit { train, test };

struct MetricConfig {
  std::optional<linalg::Index> k;
  std::optional<linalg::Index> r;
  double tau = nrc::kDefaultTau;
  std::optional<std::vector<std::size_t>> epochs;
  MetricSplit split = MetricSplit::train;
  nrc::Centering nrc4_centering = nrc::Centering::centered;
  nrc::Nrc3Convention nrc3_convention = nrc::Nrc3Convention::previous_layer;
  bool nrc3_include_input = false;
  double rcond = linalg::kDefaultRcond;

  nrc::MetricOptions options() const;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  std::filesystem::path output_dir;
  DatasetConfig dataset;
  ArchitectureConfig architecture;
  nn::TrainSchedule schedule;  // milestones/metric_epochs already defaulted
  MetricConfig metrics;

  /// Input and target widths implied by the dataset block, when known
  /// without reading data (generators, CSV column lists).
  std::pair<std::optional<linalg::Index>, std::optional<linalg::Index>> declared_dims() const;

  /// Architecture for data with d inputs and t targets.
  nn::MlpArchitecture resolve_architecture(linalg::Index d, linalg::Index t) const;

  void validate() const;
};

/// Parses and validates. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (all defaults materialized); parse_config round-trips it.
std::string to_json_text(const ExperimentConfig& config);

/// Parses a bare dataset block (the `gen-data` spec file format).
DatasetConfig parse_dataset_config(const std::string& json_text,
                                   const std::filesystem::path& base_dir = {});

}  // namespace deepnrc::runner
