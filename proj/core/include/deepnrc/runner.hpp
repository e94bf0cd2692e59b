// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: data preparation, training with metric
// snapshots, weight-decay sweeps and re-measurement of saved models.

#pragma once

#include "deepnrc/config.hpp"
#include "deepnrc/error.hpp"
#include "deepnrc/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepnrc::runner {

std::string_view version() noexcept;

/// A run aborted in `stage` ("data", "train", "metrics", "report", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // replaces data and training seeds
  std::size_t threads = 1;            // sweep parallelism
  std::ostream* log = nullptr;        // progress lines; null for silence
};

/// Worker count: NRC_PROBE_THREADS when set, else `requested`; at least 1.
std::size_t resolve_threads(std::size_t requested);

/// Copy of `config` with both seeds replaced.
ExperimentConfig with_seed(ExperimentConfig config, std::uint64_t seed);

struct PreparedData {
  data::Dataset full;
  data::SplitDataset split;
  std::optional<data::Scaler> scaler;
  std::string fingerprint;  // of the split actually trained on
};

PreparedData prepare_data(const ExperimentConfig& config);

struct RunOutcome {
  std::filesystem::path run_dir;
  RunRecord record;
  nn::MlpParameters params;
};

/// Trains and writes manifest.json, model.bin, layers.csv, loss.csv,
/// report.json (and lowrank.csv) under config.output_dir. On failure the
/// manifest is marked failed, partial tables are kept, and StageError is
/// thrown.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});
RunOutcome run_experiment(const ExperimentConfig& config, const PreparedData& data,
                          const RunOptions& options = {});

/// Metrics of one parameter set on the configured split.
MetricSnapshot measure_snapshot(const ExperimentConfig& config, const PreparedData& data,
                                const nn::MlpParameters& params, std::size_t epoch);

/// Reloads a checkpoint and recomputes its snapshot.
MetricSnapshot measure(const ExperimentConfig& config, const std::filesystem::path& checkpoint);

struct SweepRun {
  double lambda = 0.0;
  std::filesystem::path run_dir;
  std::optional<RunRecord> record;  // empty when the run failed
  std::string error;
};

/// One run per lambda under config.output_dir/<index>_wd_<lambda>, all on the
/// same data and seeds. Failures are isolated per run. Writes sweep.csv.
std::vector<SweepRun> sweep_weight_decay(const ExperimentConfig& config,
                                         std::span<const double> lambdas,
                                         const RunOptions& options = {});

/// lambda,layer,nrc1,nrc3,stable_rank_W at each run's final snapshot.
std::string sweep_table_csv(const std::vector<SweepRun>& runs);

}  // namespace deepnrc::runner
