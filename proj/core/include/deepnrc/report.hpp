// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk artifacts of a run: manifest.json, layers.csv, loss.csv,
// lowrank.csv and report.json.

#pragma once

#include "deepnrc/nn.hpp"
#include "deepnrc/nrc.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace deepnrc::runner {

inline constexpr int kReportSchemaVersion = 1;

enum class RunStatus { running, complete, failed };

std::string_view to_string(RunStatus s) noexcept;

struct RunManifest {
  std::string name;
  RunStatus status = RunStatus::running;
  std::string failed_stage;  // set when status == failed
  std::string error;

  std::string software_version;
  std::string config_sha256;
  std::string config_json;  // canonical form, enough to re-run
  std::uint64_t data_seed = 0;
  std::uint64_t train_seed = 0;
  std::string prng;
  std::string dataset_fingerprint;
  std::string dataset_provenance_json;

  // Design decisions in effect.
  double tau = nrc::kDefaultTau;
  std::string activation;
  std::string init;
  std::vector<linalg::Index> hidden_widths;
  std::vector<std::size_t> milestones;
  double gamma = 0.1;
  double weight_decay = 0.0;
  std::string nrc4_centering;
  std::string nrc3_convention;
  std::string metric_split;
  linalg::Index subspace_dim = 0;
  std::optional<linalg::Index> intrinsic_rank;
  std::vector<std::size_t> metric_epochs;
  bool standardize = false;
  std::vector<std::size_t> dropped_input_columns;
  double target_stable_rank = 0.0;

  double wall_seconds = 0.0;
  double mean_epoch_seconds = 0.0;
  std::size_t epochs_completed = 0;
  std::optional<double> final_train_mse;
  std::optional<double> final_test_mse;
};

struct MetricSnapshot {
  nrc::CollapseReport report;
  std::vector<nrc::LowRankMetrics> lowrank;  // empty unless r configured
};

/// Everything a run produced. Snapshot epochs strictly increase.
struct RunRecord {
  RunManifest manifest;
  std::vector<nn::EpochLoss> history;
  std::vector<MetricSnapshot> snapshots;
};

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& run_dir);

/// CSV tables exactly as written to disk.
std::string layers_csv(const RunRecord& record);
std::string loss_csv(const RunRecord& record);
std::string lowrank_csv(const RunRecord& record);
std::string report_json(const RunRecord& record);

/// Writes layers.csv, loss.csv, report.json (and lowrank.csv when present).
void emit_report(const std::filesystem::path& run_dir, const RunRecord& record);

/// Reads report.json back into memory.
RunRecord read_report(const std::filesystem::path& run_dir);

}  // namespace deepnrc::runner
