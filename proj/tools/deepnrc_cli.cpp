// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// deepnrc: train regressors and measure layer-wise collapse.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include "deepnrc/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using namespace deepnrc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool quiet = false;

  runner::RunOptions options() const {
    runner::RunOptions o;
    o.seed = seed;
    o.threads = threads;
    o.log = quiet ? nullptr : &std::cerr;
    return o;
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_split(runner::ExperimentConfig& cfg, const std::string& split) {
  if (split.empty()) return;
  cfg.metrics.split = split == "test" ? runner::MetricSplit::test : runner::MetricSplit::train;
}

int gen_data(const Globals& g, const fs::path& spec_path, const fs::path& out_dir) {
  auto dc = runner::parse_dataset_config(read_file(spec_path), spec_path.parent_path());
  if (g.seed) {
    if (auto* spec = std::get_if<data::GeneratorSpec>(&dc.source)) spec->seed = *g.seed;
  }
  data::Dataset ds;
  if (const auto* spec = std::get_if<data::GeneratorSpec>(&dc.source)) {
    ds = data::generate(*spec, dc.name);
  } else {
    const auto& c = std::get<runner::CsvSource>(dc.source);
    ds = data::load_csv(c.path, c.schema, dc.name);
  }
  data::save_dataset(out_dir, ds);
  data::write_csv(out_dir / "data.csv", ds);
  if (!g.quiet) {
    std::cerr << fmt::format("wrote {} rows (d={}, t={}) to {}\n", ds.samples(), ds.input_dim(),
                             ds.target_dim(), out_dir.string());
  }
  return kExitOk;
}

int train(const Globals& g, const fs::path& config_path, const std::string& output_dir,
          const std::string& split) {
  auto cfg = runner::load_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  apply_split(cfg, split);
  const auto out = runner::run_experiment(cfg, g.options());
  std::cout << out.run_dir.string() << '\n';
  return kExitOk;
}

int measure(const Globals& g, const fs::path& config_path, const fs::path& checkpoint,
            const std::string& split, const std::string& format) {
  auto cfg = runner::load_config(config_path);
  if (g.seed) cfg = runner::with_seed(cfg, *g.seed);
  apply_split(cfg, split);
  runner::RunRecord record;
  record.manifest.name = cfg.name;
  record.snapshots.push_back(runner::measure(cfg, checkpoint));
  std::cout << (format == "json" ? runner::report_json(record) : runner::layers_csv(record));
  return kExitOk;
}

int sweep(const Globals& g, const fs::path& config_path, const std::vector<double>& lambdas,
          const std::string& output_dir) {
  auto cfg = runner::load_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto runs = runner::sweep_weight_decay(cfg, lambdas, g.options());
  std::cout << runner::sweep_table_csv(runs);
  int failed = 0;
  for (const auto& r : runs) {
    if (!r.record) {
      std::cerr << fmt::format("deepnrc: run lambda={} failed: {}\n", r.lambda, r.error);
      ++failed;
    }
  }
  return failed == 0 ? kExitOk : kExitRuntime;
}

int report(const fs::path& run_dir, const std::string& format) {
  const auto record = runner::read_report(run_dir);
  runner::emit_report(run_dir, record);
  std::cout << (format == "json" ? runner::report_json(record) : runner::layers_csv(record));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise neural regression collapse diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(runner::version()));
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Replace data and training seeds");
  app.add_option("--threads", g.threads, "Parallel sweep runs (NRC_PROBE_THREADS overrides)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "No progress output on stderr");

  std::string spec_path, config_path, checkpoint, run_dir, output_dir, split, format = "csv";
  std::vector<double> lambdas;

  auto* gen = app.add_subcommand("gen-data", "Generate or ingest a dataset");
  gen->add_option("spec", spec_path, "Dataset spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--output", output_dir, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train and record metric snapshots");
  tr->add_option("-c,--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  tr->add_option("--output-dir", output_dir, "Override output_dir");
  tr->add_option("--split", split, "Split measured")->check(CLI::IsMember({"train", "test"}));

  auto* me = app.add_subcommand("measure", "Recompute metrics from a checkpoint");
  me->add_option("-c,--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  me->add_option("--checkpoint", checkpoint, "model.bin")->required()->check(CLI::ExistingFile);
  me->add_option("--split", split, "Split measured")->check(CLI::IsMember({"train", "test"}));
  me->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sw = app.add_subcommand("sweep-wd", "Weight-decay sweep");
  sw->add_option("-c,--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  sw->add_option("--lambdas", lambdas, "Comma-separated weight decays")->required()->delimiter(',');
  sw->add_option("--output-dir", output_dir, "Override output_dir");

  auto* rp = app.add_subcommand("report", "Regenerate report tables of a run");
  rp->add_option("run-dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  rp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*gen) return gen_data(g, spec_path, output_dir);
    if (*tr) return train(g, config_path, output_dir, split);
    if (*me) return measure(g, config_path, checkpoint, split, format);
    if (*sw) return sweep(g, config_path, lambdas, output_dir);
    if (*rp) return report(run_dir, format);
  } catch (const ConfigError& e) {
    std::cerr << "deepnrc: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "deepnrc: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
