// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/runner.hpp"

#include "deepnrc/container.hpp"
#include "deepnrc/rng.hpp"
#include "json_io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#ifndef DEEPNRC_VERSION
#define DEEPNRC_VERSION "0.0.0"
#endif

namespace deepnrc::runner {

using detail::json;

std::string_view version() noexcept { return DEEPNRC_VERSION; }

std::size_t resolve_threads(std::size_t requested) {
  if (const char* env = std::getenv("NRC_PROBE_THREADS"); env && *env) {
    std::size_t value = 0;
    const auto* end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw ConfigError("NRC_PROBE_THREADS", fmt::format("not a thread count: \"{}\"", env));
    }
    requested = value;
  }
  return std::max<std::size_t>(requested, 1);
}

ExperimentConfig with_seed(ExperimentConfig config, std::uint64_t seed) {
  if (auto* g = std::get_if<data::GeneratorSpec>(&config.dataset.source)) g->seed = seed;
  config.schedule.seed = seed;
  return config;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  PreparedData out;
  const auto& dc = config.dataset;
  if (const auto* g = std::get_if<data::GeneratorSpec>(&dc.source)) {
    out.full = data::generate(*g, dc.name);
  } else {
    const auto& c = std::get<CsvSource>(dc.source);
    out.full = data::load_csv(c.path, c.schema, dc.name);
  }
  auto split = data::split_front(out.full, dc.split_fraction);
  if (dc.standardize) {
    auto s = data::standardize(split);
    out.split = std::move(s.split);
    out.scaler = std::move(s.scaler);
  } else {
    out.split = std::move(split);
  }
  out.fingerprint = container::fingerprint({&out.split.train.inputs, &out.split.train.targets,
                                            &out.split.test.inputs, &out.split.test.targets});
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string_view centering_name(nrc::Centering c) {
  return c == nrc::Centering::centered ? "centered" : "uncentered";
}

std::string_view convention_name(nrc::Nrc3Convention c) {
  return c == nrc::Nrc3Convention::previous_layer ? "previous_layer" : "same_layer";
}

json provenance_json(const data::Dataset& ds) {
  const auto& p = ds.provenance;
  json j{{"name", ds.name},
         {"N", ds.samples()},
         {"d", ds.input_dim()},
         {"t", ds.target_dim()},
         {"content_sha256", p.content_sha256},
         {"target_log_transform", p.target_log_transform}};
  if (p.generator) {
    j["generator"] = detail::to_json(*p.generator);
    j["prng"] = p.prng;
  }
  if (p.source_file) {
    j["source_file"] = p.source_file->string();
    j["file_sha256"] = p.file_sha256;
  }
  return j;
}

RunManifest initial_manifest(const ExperimentConfig& config) {
  RunManifest m;
  m.name = config.name;
  m.software_version = std::string(version());
  m.config_json = to_json_text(config);
  m.config_sha256 = container::sha256_hex(m.config_json);
  if (const auto* g = std::get_if<data::GeneratorSpec>(&config.dataset.source)) m.data_seed = g->seed;
  m.train_seed = config.schedule.seed;
  m.prng = std::string(rng::kGeneratorName);
  m.tau = config.metrics.tau;
  m.activation = std::string(to_string(config.architecture.activation));
  m.init = std::string(nn::to_string(config.schedule.init));
  m.hidden_widths = config.architecture.resolved_hidden_widths();
  m.milestones = config.schedule.milestones;
  m.gamma = config.schedule.decay_factor;
  m.weight_decay = config.schedule.weight_decay;
  m.nrc4_centering = std::string(centering_name(config.metrics.nrc4_centering));
  m.nrc3_convention = std::string(convention_name(config.metrics.nrc3_convention));
  m.metric_split = config.metrics.split == MetricSplit::train ? "train" : "test";
  m.intrinsic_rank = config.metrics.r;
  m.metric_epochs = config.schedule.metric_epochs;
  m.standardize = config.dataset.standardize;
  return m;
}

MetricSnapshot snapshot_from_trace(const ExperimentConfig& config, const nn::ActivationTrace& trace,
                                   const nn::MlpParameters& params, const linalg::DenseMatrix& y,
                                   double model_mse, std::size_t epoch) {
  MetricSnapshot s;
  s.report = nrc::full_report(trace, params, y, config.metrics.options(), model_mse, epoch);
  if (config.metrics.r) {
    s.lowrank = nrc::lowrank_report(trace, params, *config.metrics.r, config.metrics.nrc3_convention);
  }
  return s;
}

void log_line(const RunOptions& options, const std::string& line) {
  if (!options.log) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  *options.log << line << '\n';
  options.log->flush();
}

}  // namespace

MetricSnapshot measure_snapshot(const ExperimentConfig& config, const PreparedData& data,
                                const nn::MlpParameters& params, std::size_t epoch) {
  const auto& side = config.metrics.split == MetricSplit::train ? data.split.train : data.split.test;
  const auto trace = nn::forward_capture(params, side.inputs);
  const double mse = nn::mse_loss(trace.predictions, side.targets);
  return snapshot_from_trace(config, trace, params, side.targets, mse, epoch);
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const ExperimentConfig effective = options.seed ? with_seed(config, *options.seed) : config;
  effective.validate();
  const auto run_dir = effective.output_dir;
  RunManifest manifest = initial_manifest(effective);
  write_manifest(run_dir, manifest);
  PreparedData data;
  try {
    data = prepare_data(effective);
  } catch (const std::exception& e) {
    manifest.status = RunStatus::failed;
    manifest.failed_stage = "data";
    manifest.error = e.what();
    write_manifest(run_dir, manifest);
    throw StageError("data", e.what());
  }
  RunOptions rest = options;
  rest.seed.reset();
  return run_experiment(effective, data, rest);
}

RunOutcome run_experiment(const ExperimentConfig& config_in, const PreparedData& data,
                          const RunOptions& options) {
  const ExperimentConfig config = options.seed ? with_seed(config_in, *options.seed) : config_in;
  config.validate();
  const auto start = Clock::now();
  RunOutcome out;
  out.run_dir = config.output_dir;
  auto& record = out.record;
  auto& manifest = record.manifest;
  manifest = initial_manifest(config);
  manifest.dataset_fingerprint = data.fingerprint;
  manifest.dataset_provenance_json = provenance_json(data.full).dump();
  if (data.scaler) manifest.dropped_input_columns = data.scaler->dropped_columns;
  write_manifest(out.run_dir, manifest);

  std::string stage = "config";
  const auto finish_failed = [&](const std::exception& e) {
    manifest.status = RunStatus::failed;
    manifest.failed_stage = stage;
    manifest.error = e.what();
    manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    try {
      emit_report(out.run_dir, record);
    } catch (const std::exception&) {
      // keep the original failure
    }
    write_manifest(out.run_dir, manifest);
  };

  try {
    const auto arch = config.resolve_architecture(data.split.train.input_dim(),
                                                  data.split.train.target_dim());
    manifest.hidden_widths = arch.hidden_widths;
    manifest.subspace_dim = config.metrics.k.value_or(arch.output_dim);
    write_manifest(out.run_dir, manifest);

    const auto& test_side = data.split.test;
    const bool on_test = config.metrics.split == MetricSplit::test;
    auto last_tick = Clock::now();
    double train_seconds = 0.0;

    stage = "train";
    const auto on_metrics = [&](std::size_t epoch, const nn::ActivationTrace& train_trace,
                                const nn::MlpParameters& params, const nn::EpochLoss& loss) {
      stage = "metrics";
      if (on_test) {
        const auto trace = nn::forward_capture(params, test_side.inputs);
        record.snapshots.push_back(
            snapshot_from_trace(config, trace, params, test_side.targets, loss.test_mse, epoch));
      } else {
        record.snapshots.push_back(snapshot_from_trace(config, train_trace, params,
                                                       data.split.train.targets, loss.train_mse, epoch));
      }
      const auto& r = record.snapshots.back().report;
      log_line(options, fmt::format("[{}] epoch {} metrics: first collapsed layer {}", config.name,
                                    epoch,
                                    r.first_collapsed_layer ? std::to_string(*r.first_collapsed_layer)
                                                            : std::string("none")));
      stage = "train";
    };
    const auto on_epoch = [&](const nn::EpochLoss& loss) {
      record.history.push_back(loss);
      const auto now = Clock::now();
      if (loss.epoch > 0) train_seconds += std::chrono::duration<double>(now - last_tick).count();
      last_tick = now;
      manifest.epochs_completed = loss.epoch;
      if (loss.epoch % 10 == 0 || loss.epoch == config.schedule.epochs) {
        log_line(options, fmt::format("[{}] epoch {} train_mse {:.6g} test_mse {:.6g} lr {:g}",
                                      config.name, loss.epoch, loss.train_mse, loss.test_mse, loss.lr));
      }
    };
    auto result = nn::train(arch, config.schedule, data.split, on_metrics, on_epoch);
    out.params = std::move(result.params);

    stage = "checkpoint";
    nn::save_checkpoint(out.run_dir / "model.bin", {out.params, config.schedule, config.schedule.epochs});

    stage = "report";
    if (!record.history.empty()) {
      manifest.final_train_mse = record.history.back().train_mse;
      manifest.final_test_mse = record.history.back().test_mse;
    }
    if (!record.snapshots.empty()) manifest.target_stable_rank = record.snapshots.back().report.target_stable_rank;
    manifest.mean_epoch_seconds =
        config.schedule.epochs > 0 ? train_seconds / static_cast<double>(config.schedule.epochs) : 0.0;
    manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    manifest.status = RunStatus::complete;
    emit_report(out.run_dir, record);
    write_manifest(out.run_dir, manifest);
  } catch (const ConfigError& e) {
    finish_failed(e);
    throw;
  } catch (const std::exception& e) {
    finish_failed(e);
    throw StageError(stage, e.what());
  }
  return out;
}

MetricSnapshot measure(const ExperimentConfig& config, const std::filesystem::path& checkpoint) {
  config.validate();
  const auto ckpt = nn::load_checkpoint(checkpoint);
  const auto data = prepare_data(config);
  const auto arch = config.resolve_architecture(data.split.train.input_dim(), data.split.train.target_dim());
  if (!(arch == ckpt.params.architecture)) {
    throw ConfigError("architecture", "checkpoint architecture differs from the config");
  }
  return measure_snapshot(config, data, ckpt.params, ckpt.epoch);
}

std::vector<SweepRun> sweep_weight_decay(const ExperimentConfig& config_in,
                                         std::span<const double> lambdas,
                                         const RunOptions& options) {
  if (lambdas.size() < 2) throw ConfigError("lambdas", "a sweep needs at least two values");
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambdas", "values must be nonnegative");
  }
  const ExperimentConfig config = options.seed ? with_seed(config_in, *options.seed) : config_in;
  config.validate();
  const PreparedData data = prepare_data(config);

  std::vector<SweepRun> runs(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    runs[i].lambda = lambdas[i];
    runs[i].run_dir = config.output_dir / fmt::format("{:02}_wd_{}", i, detail::format_double(lambdas[i]));
  }
  RunOptions child = options;
  child.seed.reset();
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      ExperimentConfig c = config;
      c.schedule.weight_decay = runs[i].lambda;
      c.output_dir = runs[i].run_dir;
      c.name = fmt::format("{}_wd_{}", config.name, detail::format_double(runs[i].lambda));
      try {
        runs[i].record = run_experiment(c, data, child).record;
      } catch (const std::exception& e) {
        runs[i].error = e.what();
        log_line(options, fmt::format("[{}] failed: {}", c.name, e.what()));
      }
    }
  };
  const std::size_t n_threads = std::min(resolve_threads(options.threads), runs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  std::filesystem::create_directories(config.output_dir);
  const auto table = sweep_table_csv(runs);
  std::ofstream(config.output_dir / "sweep.csv", std::ios::trunc) << table;
  return runs;
}

std::string sweep_table_csv(const std::vector<SweepRun>& runs) {
  std::string out = "lambda,layer,nrc1,nrc3,stable_rank_W\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
  };
  for (const auto& run : runs) {
    if (!run.record || run.record->snapshots.empty()) continue;
    for (const auto& m : run.record->snapshots.back().report.layers) {
      out += fmt::format("{},{},{},{},{}\n", detail::format_double(run.lambda), m.layer_index,
                         detail::format_double(m.nrc1_noise), cell(m.nrc3_alignment),
                         cell(m.stable_rank_W));
    }
  }
  return out;
}

}  // namespace deepnrc::runner
