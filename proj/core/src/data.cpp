// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/data.hpp"

#include "deepnrc/container.hpp"
#include "deepnrc/error.hpp"
#include "deepnrc/rng.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace deepnrc::data {

using detail::json;

std::string_view to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::linear_lowrank ? "linear_lowrank" : "nonlinear_mlp";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view s) noexcept {
  if (s == "linear_lowrank") return GeneratorKind::linear_lowrank;
  if (s == "nonlinear_mlp") return GeneratorKind::nonlinear_mlp;
  return std::nullopt;
}

void GeneratorSpec::validate() const {
  if (n <= 0) throw ConfigError("n", "must be positive");
  if (d <= 0) throw ConfigError("d", "must be positive");
  if (t <= 0) throw ConfigError("t", "must be positive");
  if (r < 1) throw ConfigError("r", "must be at least 1");
  if (kind == GeneratorKind::linear_lowrank && r > t) {
    throw ConfigError("r", fmt::format("rank {} exceeds target dimension {}", r, t));
  }
  if (!(weight_scale >= 0.0) || !std::isfinite(weight_scale)) {
    throw ConfigError("weight_scale", "must be finite and nonnegative");
  }
}

void Dataset::validate() const {
  if (inputs.rows() != targets.rows()) {
    throw ShapeError(fmt::format("dataset '{}': {} input rows vs {} target rows", name,
                                 inputs.rows(), targets.rows()));
  }
  if (inputs.rows() < 2) throw ShapeError(fmt::format("dataset '{}': fewer than 2 rows", name));
  linalg::require_finite(inputs, "dataset inputs");
  linalg::require_finite(targets, "dataset targets");
}

DenseMatrix gaussian_inputs(Index n, Index d, std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw ShapeError("gaussian_inputs: n and d must be positive");
  auto engine = rng::make_engine(seed, rng::kStreamInputs);
  return rng::normal_matrix(engine, n, d);
}

DenseMatrix linear_lowrank_map(Index d, Index t, Index r, std::uint64_t seed) {
  if (r < 1 || r > t) {
    throw ShapeError(fmt::format("linear_lowrank: rank {} outside [1, t={}]", r, t));
  }
  auto engine = rng::make_engine(seed, rng::kStreamTargets);
  const DenseMatrix b = rng::normal_matrix(engine, d, r);
  const DenseMatrix c = rng::normal_matrix(engine, r, t);
  DenseMatrix a = b * c;
  if (r < std::min(d, t)) {
    const auto s = linalg::svd(a).singular_values;
    if (!(s(r) < 1e-10 * s(0))) {
      throw NumericalError(fmt::format("linear_lowrank: sigma_{}/sigma_1 = {:.3e}", r + 1,
                                       s(r) / s(0)));
    }
  }
  return a;
}

DenseMatrix linear_lowrank_targets(const DenseMatrix& x, Index t, Index r, std::uint64_t seed) {
  return x * linear_lowrank_map(x.cols(), t, r, seed);
}

DenseMatrix nonlinear_targets(const DenseMatrix& x, Index t, Index r, std::uint64_t seed,
                              Activation activation, double weight_scale) {
  if (t < 1 || r < 1) throw ShapeError("nonlinear_targets: t and r must be at least 1");
  auto engine = rng::make_engine(seed, rng::kStreamTargets);
  const Index widths[] = {x.cols(), r, r, t};
  DenseMatrix h = x;
  for (int layer = 0; layer < 3; ++layer) {
    const Index fan_in = widths[layer];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const DenseMatrix w = rng::normal_matrix(engine, widths[layer + 1], fan_in, scale * weight_scale);
    const DenseMatrix b = rng::normal_matrix(engine, 1, widths[layer + 1], scale);
    DenseMatrix z = h * w.transpose();
    z.rowwise() += b.row(0);
    if (layer < 2) apply_activation(activation, z);
    h = std::move(z);
  }
  return h;
}

Dataset generate(const GeneratorSpec& spec, std::string name) {
  spec.validate();
  Dataset ds;
  ds.inputs = gaussian_inputs(spec.n, spec.d, spec.seed);
  ds.targets = spec.kind == GeneratorKind::linear_lowrank
                   ? linear_lowrank_targets(ds.inputs, spec.t, spec.r, spec.seed)
                   : nonlinear_targets(ds.inputs, spec.t, spec.r, spec.seed, spec.activation,
                                       spec.weight_scale);
  ds.name = name.empty() ? fmt::format("{}_d{}_t{}_r{}", to_string(spec.kind), spec.d, spec.t,
                                       spec.r)
                         : std::move(name);
  ds.seed = spec.seed;
  ds.provenance.generator = spec;
  ds.provenance.prng = std::string(rng::kGeneratorName);
  ds.provenance.content_sha256 = container::fingerprint({&ds.inputs, &ds.targets});
  ds.validate();
  return ds;
}

SplitDataset split_front(const Dataset& ds, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split_fraction", fmt::format("{} is not in (0, 1)", fraction));
  }
  const Index n = ds.samples();
  const auto n_train = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw ShapeError(fmt::format("split_front: fraction {} of {} rows leaves an empty side",
                                 fraction, n));
  }
  SplitDataset out;
  out.split_fraction = fraction;
  out.train = ds;
  out.test = ds;
  out.train.inputs = ds.inputs.topRows(n_train);
  out.train.targets = ds.targets.topRows(n_train);
  out.test.inputs = ds.inputs.bottomRows(n - n_train);
  out.test.targets = ds.targets.bottomRows(n - n_train);
  out.train.name = ds.name + "/train";
  out.test.name = ds.name + "/test";
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                           std::size_t width, const std::filesystem::path& path) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) {
    if (*idx >= width) {
      throw DataError(
          fmt::format("{}: column index {} out of range (rows have {} fields)", path.string(),
                      *idx, width));
    }
    return *idx;
  }
  const auto& name = std::get<std::string>(ref);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError(fmt::format("{}: missing column '{}'", path.string(), name));
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name) {
  if (schema.input_columns.empty() || schema.target_columns.empty()) {
    throw ConfigError("dataset.input_columns", "input and target column lists must be non-empty");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path.string()));

  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, schema.delimiter);
    if (schema.has_header && header.empty()) {
      for (auto f : fields) header.emplace_back(f);
      width = header.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(fmt::format("{}: line {} has {} fields, expected {}", path.string(), line_no,
                                  fields.size(), width));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto f = fields[c];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), values[c]);
      if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() ||
          !std::isfinite(values[c])) {
        throw DataError(fmt::format("{}: line {} field {} is not a finite number: '{}'",
                                    path.string(), line_no, c, f));
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) throw DataError(fmt::format("{}: fewer than 2 data rows", path.string()));

  std::vector<std::size_t> in_cols, out_cols;
  for (const auto& ref : schema.input_columns) in_cols.push_back(resolve_column(ref, header, width, path));
  for (const auto& ref : schema.target_columns) out_cols.push_back(resolve_column(ref, header, width, path));

  Dataset ds;
  const auto n = static_cast<Index>(rows.size());
  ds.inputs.resize(n, static_cast<Index>(in_cols.size()));
  ds.targets.resize(n, static_cast<Index>(out_cols.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < in_cols.size(); ++c) ds.inputs(i, static_cast<Index>(c)) = row[in_cols[c]];
    for (std::size_t c = 0; c < out_cols.size(); ++c) {
      double v = row[out_cols[c]];
      if (schema.target_log_transform) {
        if (!(v > 0.0)) {
          // Data rows are counted from 1 after the header.
          throw DataError(fmt::format("{}: data row {} target {} = {} cannot be log-transformed",
                                      path.string(), i + 1, c, v));
        }
        v = std::log(v);
      }
      ds.targets(i, static_cast<Index>(c)) = v;
    }
  }
  ds.name = name.empty() ? path.stem().string() : std::move(name);
  ds.provenance.source_file = path;
  ds.provenance.file_sha256 = container::sha256_file(path);
  ds.provenance.target_log_transform = schema.target_log_transform;
  ds.provenance.content_sha256 = container::fingerprint({&ds.inputs, &ds.targets});
  ds.validate();
  return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds, char delimiter) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("{}: cannot open for writing", path.string()));
  for (Index c = 0; c < ds.input_dim(); ++c) out << (c ? std::string(1, delimiter) : "") << 'x' << c;
  for (Index c = 0; c < ds.target_dim(); ++c) out << delimiter << 'y' << c;
  out << '\n';
  for (Index i = 0; i < ds.samples(); ++i) {
    for (Index c = 0; c < ds.input_dim(); ++c) {
      if (c) out << delimiter;
      out << detail::format_double(ds.inputs(i, c));
    }
    for (Index c = 0; c < ds.target_dim(); ++c) out << delimiter << detail::format_double(ds.targets(i, c));
    out << '\n';
  }
}

DenseMatrix Scaler::apply(const DenseMatrix& inputs) const {
  DenseMatrix out(inputs.rows(), static_cast<Index>(kept_columns.size()));
  for (std::size_t c = 0; c < kept_columns.size(); ++c) {
    const auto src = static_cast<Index>(kept_columns[c]);
    if (src >= inputs.cols()) throw ShapeError("Scaler::apply: input has too few columns");
    out.col(static_cast<Index>(c)) =
        (inputs.col(src).array() - mean[c]) / stddev[c];
  }
  return out;
}

StandardizedSplit standardize(const SplitDataset& split) {
  const DenseMatrix& x = split.train.inputs;
  StandardizedSplit out;
  for (Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double var = (x.col(c).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      out.scaler.dropped_columns.push_back(static_cast<std::size_t>(c));
      std::cerr << fmt::format("warning: standardize: input column {} is constant on the train split; dropped\n", c);
      continue;
    }
    out.scaler.kept_columns.push_back(static_cast<std::size_t>(c));
    out.scaler.mean.push_back(mean);
    out.scaler.stddev.push_back(sd);
  }
  if (out.scaler.kept_columns.empty()) {
    throw DataError("standardize: every input column is constant on the train split");
  }
  out.split = split;
  out.split.train.inputs = out.scaler.apply(split.train.inputs);
  out.split.test.inputs = out.scaler.apply(split.test.inputs);
  return out;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  container::write(dir / "dataset.bin",
                   {json{{"tensors", {"inputs", "targets"}}}.dump(), {ds.inputs, ds.targets}});
  json side{{"name", ds.name},
            {"seed", ds.seed},
            {"d", ds.input_dim()},
            {"t", ds.target_dim()},
            {"N", ds.samples()},
            {"content_sha256", ds.provenance.content_sha256},
            {"target_log_transform", ds.provenance.target_log_transform}};
  if (ds.provenance.generator) {
    side["generator"] = detail::to_json(*ds.provenance.generator);
    side["prng"] = ds.provenance.prng;
  }
  if (ds.provenance.source_file) {
    side["source_file"] = ds.provenance.source_file->string();
    side["file_sha256"] = ds.provenance.file_sha256;
  }
  std::ofstream out(dir / "dataset.json", std::ios::trunc);
  out << side.dump(2) << '\n';
  if (!out) throw DataError(fmt::format("{}: write failed", (dir / "dataset.json").string()));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto file = container::read(dir / "dataset.bin");
  if (file.tensors.size() != 2) {
    throw DataError(fmt::format("{}: expected 2 tensors, found {}", (dir / "dataset.bin").string(),
                                file.tensors.size()));
  }
  std::ifstream in(dir / "dataset.json");
  if (!in) throw DataError(fmt::format("{}: missing sidecar", (dir / "dataset.json").string()));
  json side;
  try {
    side = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: {}", (dir / "dataset.json").string(), e.what()));
  }
  Dataset ds;
  ds.inputs = file.tensors[0];
  ds.targets = file.tensors[1];
  ds.name = side.value("name", std::string{});
  ds.seed = side.value("seed", std::uint64_t{0});
  ds.provenance.content_sha256 = side.value("content_sha256", std::string{});
  ds.provenance.target_log_transform = side.value("target_log_transform", false);
  if (side.contains("generator")) {
    ds.provenance.generator = detail::generator_from_json(side["generator"], "generator");
    ds.provenance.prng = side.value("prng", std::string{});
  }
  if (side.contains("source_file")) {
    ds.provenance.source_file = side["source_file"].get<std::string>();
    ds.provenance.file_sha256 = side.value("file_sha256", std::string{});
  }
  if (container::fingerprint({&ds.inputs, &ds.targets}) != ds.provenance.content_sha256) {
    throw DataError(fmt::format("{}: content hash does not match sidecar", dir.string()));
  }
  ds.validate();
  return ds;
}

}  // namespace deepnrc::data
