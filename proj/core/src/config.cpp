// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/config.hpp"

#include "deepnrc/error.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace deepnrc {
namespace detail {

namespace {

const json& at(const json& obj, std::string_view key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join_path(path, key), "required key missing");
  return *it;
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::size_t as_count(const json& v, const std::string& path) {
  const auto i = as_integer(v, path);
  if (i < 0) throw ConfigError(path, "must be nonnegative");
  return static_cast<std::size_t>(i);
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  return static_cast<std::uint64_t>(as_count(v, path));
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> as_count_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_count(v[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

Activation as_activation(const json& v, const std::string& path) {
  const auto a = parse_activation(as_string(v, path));
  if (!a) throw ConfigError(path, "expected \"relu\" or \"tanh\"");
  return *a;
}

template <typename Fn>
void if_present(const json& obj, std::string_view key, Fn&& fn) {
  const auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) fn(*it);
}

}  // namespace

json to_json(const data::GeneratorSpec& spec) {
  return json{{"kind", data::to_string(spec.kind)}, {"n", spec.n},
              {"d", spec.d},                        {"t", spec.t},
              {"r", spec.r},                        {"seed", spec.seed},
              {"activation", to_string(spec.activation)}, {"weight_scale", spec.weight_scale}};
}

data::GeneratorSpec generator_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, path, {"kind", "n", "d", "t", "r", "seed", "activation", "weight_scale"});
  data::GeneratorSpec spec;
  const auto kind = data::parse_generator_kind(as_string(at(j, "kind", path), join_path(path, "kind")));
  if (!kind) throw ConfigError(join_path(path, "kind"), "expected \"linear_lowrank\" or \"nonlinear_mlp\"");
  spec.kind = *kind;
  spec.n = static_cast<linalg::Index>(as_count(at(j, "n", path), join_path(path, "n")));
  spec.d = static_cast<linalg::Index>(as_count(at(j, "d", path), join_path(path, "d")));
  spec.t = static_cast<linalg::Index>(as_count(at(j, "t", path), join_path(path, "t")));
  spec.r = static_cast<linalg::Index>(as_count(at(j, "r", path), join_path(path, "r")));
  if_present(j, "seed", [&](const json& v) { spec.seed = as_seed(v, join_path(path, "seed")); });
  if_present(j, "activation",
             [&](const json& v) { spec.activation = as_activation(v, join_path(path, "activation")); });
  if_present(j, "weight_scale",
             [&](const json& v) { spec.weight_scale = as_real(v, join_path(path, "weight_scale")); });
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join_path(path, e.field()), e.what());
  }
  return spec;
}

json to_json(const nn::MlpArchitecture& arch) {
  return json{{"input_dim", arch.input_dim},
              {"hidden_widths", arch.hidden_widths},
              {"output_dim", arch.output_dim},
              {"activation", to_string(arch.hidden_activation)}};
}

nn::MlpArchitecture architecture_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, path, {"input_dim", "hidden_widths", "output_dim", "activation"});
  nn::MlpArchitecture arch;
  arch.input_dim = static_cast<linalg::Index>(as_count(at(j, "input_dim", path), join_path(path, "input_dim")));
  arch.output_dim = static_cast<linalg::Index>(as_count(at(j, "output_dim", path), join_path(path, "output_dim")));
  for (auto w : as_count_list(at(j, "hidden_widths", path), join_path(path, "hidden_widths"))) {
    arch.hidden_widths.push_back(static_cast<linalg::Index>(w));
  }
  arch.hidden_activation = as_activation(at(j, "activation", path), join_path(path, "activation"));
  arch.validate();
  return arch;
}

json to_json(const nn::TrainSchedule& s) {
  return json{{"lr", s.initial_lr},           {"milestones", s.milestones},
              {"gamma", s.decay_factor},      {"momentum", s.momentum},
              {"weight_decay", s.weight_decay}, {"epochs", s.epochs},
              {"batch_size", s.batch_size},   {"seed", s.seed},
              {"init", nn::to_string(s.init)}, {"metric_epochs", s.metric_epochs}};
}

nn::TrainSchedule schedule_from_json(const json& j, const std::string& path) {
  reject_unknown_keys(j, path,
                      {"lr", "milestones", "gamma", "momentum", "weight_decay", "epochs",
                       "batch_size", "seed", "init", "metric_epochs"});
  nn::TrainSchedule s;
  if_present(j, "init", [&](const json& v) {
    const auto scheme = nn::parse_init_scheme(as_string(v, join_path(path, "init")));
    if (!scheme) throw ConfigError(join_path(path, "init"), "expected \"he\" or \"torch_default\"");
    s.init = *scheme;
  });
  if_present(j, "lr", [&](const json& v) { s.initial_lr = as_real(v, join_path(path, "lr")); });
  if_present(j, "gamma", [&](const json& v) { s.decay_factor = as_real(v, join_path(path, "gamma")); });
  if_present(j, "momentum", [&](const json& v) { s.momentum = as_real(v, join_path(path, "momentum")); });
  if_present(j, "weight_decay",
             [&](const json& v) { s.weight_decay = as_real(v, join_path(path, "weight_decay")); });
  if_present(j, "epochs", [&](const json& v) { s.epochs = as_count(v, join_path(path, "epochs")); });
  if_present(j, "batch_size",
             [&](const json& v) { s.batch_size = as_count(v, join_path(path, "batch_size")); });
  if_present(j, "seed", [&](const json& v) { s.seed = as_seed(v, join_path(path, "seed")); });
  bool have_milestones = false;
  if_present(j, "milestones", [&](const json& v) {
    s.milestones = as_count_list(v, join_path(path, "milestones"));
    have_milestones = true;
  });
  if (!have_milestones) s.milestones = nn::default_milestones(s.epochs);
  bool have_metric_epochs = false;
  if_present(j, "metric_epochs", [&](const json& v) {
    s.metric_epochs = as_count_list(v, join_path(path, "metric_epochs"));
    have_metric_epochs = true;
  });
  if (!have_metric_epochs) s.metric_epochs = nn::default_metric_epochs(s.epochs);
  return s;
}

}  // namespace detail

namespace runner {

using detail::json;

namespace {

std::filesystem::path resolve_path(const std::string& raw, const std::filesystem::path& base) {
  std::filesystem::path p(raw);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

data::ColumnRef column_ref(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw ConfigError(path, "column index must be nonnegative");
    return static_cast<std::size_t>(i);
  }
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(path, "expected a column index or header name");
}

std::vector<data::ColumnRef> column_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<data::ColumnRef> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(column_ref(v[i], fmt::format("{}[{}]", path, i)));
  return out;
}

json column_list_json(const std::vector<data::ColumnRef>& cols) {
  json out = json::array();
  for (const auto& c : cols) {
    std::visit([&](const auto& v) { out.push_back(v); }, c);
  }
  return out;
}

DatasetConfig dataset_from_json(const json& j, const std::string& path,
                                const std::filesystem::path& base) {
  using detail::join_path;
  detail::reject_unknown_keys(j, path, {"generator", "csv", "name", "split_fraction", "standardize"});
  DatasetConfig cfg;
  const bool has_gen = j.contains("generator");
  const bool has_csv = j.contains("csv");
  if (has_gen == has_csv) {
    throw ConfigError(path, "exactly one of \"generator\" or \"csv\" is required");
  }
  if (has_gen) {
    cfg.source = detail::generator_from_json(j["generator"], join_path(path, "generator"));
    cfg.standardize = false;
  } else {
    const std::string cp = join_path(path, "csv");
    const json& c = j["csv"];
    detail::reject_unknown_keys(c, cp, {"path", "input_columns", "target_columns", "has_header",
                                        "target_log_transform", "delimiter"});
    CsvSource src;
    if (!c.contains("path") || !c["path"].is_string()) throw ConfigError(join_path(cp, "path"), "expected a string");
    src.path = resolve_path(c["path"].get<std::string>(), base);
    if (!c.contains("input_columns")) throw ConfigError(join_path(cp, "input_columns"), "required key missing");
    if (!c.contains("target_columns")) throw ConfigError(join_path(cp, "target_columns"), "required key missing");
    src.schema.input_columns = column_list(c["input_columns"], join_path(cp, "input_columns"));
    src.schema.target_columns = column_list(c["target_columns"], join_path(cp, "target_columns"));
    if (c.contains("has_header")) {
      src.schema.has_header = detail::as_bool(c["has_header"], join_path(cp, "has_header"));
    }
    if (c.contains("target_log_transform")) {
      src.schema.target_log_transform =
          detail::as_bool(c["target_log_transform"], join_path(cp, "target_log_transform"));
    }
    if (c.contains("delimiter")) {
      if (!c["delimiter"].is_string() || c["delimiter"].get<std::string>().size() != 1) {
        throw ConfigError(join_path(cp, "delimiter"), "expected a one-character string");
      }
      src.schema.delimiter = c["delimiter"].get<std::string>()[0];
    }
    cfg.source = std::move(src);
    cfg.standardize = true;
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError(join_path(path, "name"), "expected a string");
    cfg.name = j["name"].get<std::string>();
  }
  if (j.contains("split_fraction")) {
    if (!j["split_fraction"].is_number()) throw ConfigError(join_path(path, "split_fraction"), "expected a number");
    cfg.split_fraction = j["split_fraction"].get<double>();
    if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
      throw ConfigError(join_path(path, "split_fraction"), "must lie in (0, 1)");
    }
  }
  if (j.contains("standardize")) {
    cfg.standardize = detail::as_bool(j["standardize"], join_path(path, "standardize"));
  }
  return cfg;
}

json dataset_to_json(const DatasetConfig& cfg) {
  json j{{"name", cfg.name}, {"split_fraction", cfg.split_fraction}, {"standardize", cfg.standardize}};
  if (const auto* g = std::get_if<data::GeneratorSpec>(&cfg.source)) {
    j["generator"] = detail::to_json(*g);
  } else {
    const auto& c = std::get<CsvSource>(cfg.source);
    j["csv"] = json{{"path", c.path.string()},
                    {"input_columns", column_list_json(c.schema.input_columns)},
                    {"target_columns", column_list_json(c.schema.target_columns)},
                    {"has_header", c.schema.has_header},
                    {"target_log_transform", c.schema.target_log_transform},
                    {"delimiter", std::string(1, c.schema.delimiter)}};
  }
  return j;
}

template <typename T, typename Fn>
void optional_field(const json& obj, std::string_view key, const std::string& path, Fn&& parse,
                    std::optional<T>& out) {
  const auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) out = parse(*it, detail::join_path(path, key));
}

linalg::Index index_value(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
    throw ConfigError(path, "expected a positive integer");
  }
  return static_cast<linalg::Index>(v.get<std::int64_t>());
}

}  // namespace

std::vector<linalg::Index> ArchitectureConfig::resolved_hidden_widths() const {
  if (hidden_widths) return *hidden_widths;
  return std::vector<linalg::Index>(depth.value_or(1) - 1, width.value_or(1));
}

nrc::MetricOptions MetricConfig::options() const {
  nrc::MetricOptions o;
  o.k = k;
  o.tau = tau;
  o.nrc4_centering = nrc4_centering;
  o.nrc3_convention = nrc3_convention;
  o.nrc3_include_input = nrc3_include_input;
  o.rcond = rcond;
  return o;
}

std::pair<std::optional<linalg::Index>, std::optional<linalg::Index>>
ExperimentConfig::declared_dims() const {
  if (const auto* g = std::get_if<data::GeneratorSpec>(&dataset.source)) {
    return {g->d, g->t};
  }
  const auto& c = std::get<CsvSource>(dataset.source);
  std::optional<linalg::Index> d;
  if (!dataset.standardize) d = static_cast<linalg::Index>(c.schema.input_columns.size());
  return {d, static_cast<linalg::Index>(c.schema.target_columns.size())};
}

nn::MlpArchitecture ExperimentConfig::resolve_architecture(linalg::Index d, linalg::Index t) const {
  if (architecture.input_dim && *architecture.input_dim != d) {
    throw ConfigError("architecture.input_dim",
                      fmt::format("{} does not match the dataset input dimension {}",
                                  *architecture.input_dim, d));
  }
  if (architecture.output_dim && *architecture.output_dim != t) {
    throw ConfigError("architecture.output_dim",
                      fmt::format("{} does not match the dataset target dimension {}",
                                  *architecture.output_dim, t));
  }
  nn::MlpArchitecture arch{d, architecture.resolved_hidden_widths(), t, architecture.activation};
  arch.validate();
  return arch;
}

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", fmt::format("unsupported version {}", schema_version));
  }
  if (name.empty()) throw ConfigError("name", "must be a non-empty string");
  if (architecture.hidden_widths && (architecture.depth || architecture.width)) {
    throw ConfigError("architecture", "give either hidden_widths or depth/width, not both");
  }
  if (!architecture.hidden_widths && (!architecture.depth || !architecture.width)) {
    throw ConfigError("architecture", "depth and width are required without hidden_widths");
  }
  const auto [d, t] = declared_dims();
  if (d && architecture.input_dim && *d != *architecture.input_dim) {
    throw ConfigError("architecture.input_dim",
                      fmt::format("{} does not match dataset dimension d = {}",
                                  *architecture.input_dim, *d));
  }
  if (t && architecture.output_dim && *t != *architecture.output_dim) {
    throw ConfigError("architecture.output_dim",
                      fmt::format("{} does not match dataset dimension t = {}",
                                  *architecture.output_dim, *t));
  }
  schedule.validate();
  const auto widths = architecture.resolved_hidden_widths();
  const linalg::Index k = metrics.k.value_or(t.value_or(1));
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < k) {
      throw ConfigError("metrics.k", fmt::format("k = {} exceeds hidden layer {} width {}", k,
                                                 i + 1, widths[i]));
    }
  }
  if (metrics.r) {
    if (t && *metrics.r > *t) throw ConfigError("metrics.r", "must not exceed the target dimension");
    for (auto w : widths) {
      if (*metrics.r >= w) throw ConfigError("metrics.r", "must be smaller than every hidden width");
    }
  }
  if (!(metrics.tau > 0.0 && metrics.tau < 1.0)) throw ConfigError("metrics.tau", "must lie in (0, 1)");
  if (!(metrics.rcond > 0.0 && metrics.rcond < 1.0)) throw ConfigError("metrics.rcond", "must lie in (0, 1)");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  using detail::join_path;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("invalid JSON: {}", e.what()));
  }
  detail::reject_unknown_keys(j, "", {"schema_version", "name", "output_dir", "dataset",
                                      "architecture", "schedule", "metrics"});
  ExperimentConfig cfg;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ConfigError("schema_version", "required integer");
  }
  cfg.schema_version = j["schema_version"].get<int>();
  if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("name", "required string");
  cfg.name = j["name"].get<std::string>();
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = resolve_path(j["output_dir"].get<std::string>(), base);
  } else {
    cfg.output_dir = resolve_path("runs/" + cfg.name, base);
  }
  if (!j.contains("dataset")) throw ConfigError("dataset", "required key missing");
  cfg.dataset = dataset_from_json(j["dataset"], "dataset", base);
  if (cfg.dataset.name.empty()) cfg.dataset.name = cfg.name;

  if (!j.contains("architecture")) throw ConfigError("architecture", "required key missing");
  const json& a = j["architecture"];
  detail::reject_unknown_keys(a, "architecture", {"depth", "width", "hidden_widths", "activation",
                                                  "input_dim", "output_dim"});
  auto& arch = cfg.architecture;
  optional_field(a, "depth", "architecture",
                 [](const json& v, const std::string& p) { return static_cast<std::size_t>(index_value(v, p)); },
                 arch.depth);
  optional_field(a, "width", "architecture", index_value, arch.width);
  optional_field(a, "input_dim", "architecture", index_value, arch.input_dim);
  optional_field(a, "output_dim", "architecture", index_value, arch.output_dim);
  if (a.contains("hidden_widths")) {
    const json& hw = a["hidden_widths"];
    if (!hw.is_array()) throw ConfigError("architecture.hidden_widths", "expected an array");
    std::vector<linalg::Index> widths;
    for (std::size_t i = 0; i < hw.size(); ++i) {
      widths.push_back(index_value(hw[i], fmt::format("architecture.hidden_widths[{}]", i)));
    }
    arch.hidden_widths = std::move(widths);
  }
  if (a.contains("activation")) {
    if (!a["activation"].is_string() || !parse_activation(a["activation"].get<std::string>())) {
      throw ConfigError("architecture.activation", "expected \"relu\" or \"tanh\"");
    }
    arch.activation = *parse_activation(a["activation"].get<std::string>());
  }

  // The teacher network shares the trained network's nonlinearity unless set.
  if (auto* g = std::get_if<data::GeneratorSpec>(&cfg.dataset.source)) {
    if (!j["dataset"]["generator"].contains("activation")) g->activation = arch.activation;
  }

  json sched = j.value("schedule", json::object());
  if (!sched.is_object()) throw ConfigError("schedule", "expected an object");
  if (sched.contains("metric_epochs")) throw ConfigError("schedule.metric_epochs", "unknown key (use metrics.epochs)");
  cfg.schedule = detail::schedule_from_json(sched, "schedule");
  if (!sched.contains("init")) cfg.schedule.init = nn::InitScheme::torch_default;

  const json m = j.value("metrics", json::object());
  detail::reject_unknown_keys(m, "metrics", {"k", "r", "tau", "epochs", "split", "nrc4_centering",
                                             "nrc3_convention", "nrc3_include_input", "rcond"});
  auto& metrics = cfg.metrics;
  optional_field(m, "k", "metrics", index_value, metrics.k);
  optional_field(m, "r", "metrics", index_value, metrics.r);
  if (m.contains("tau")) {
    if (!m["tau"].is_number()) throw ConfigError("metrics.tau", "expected a number");
    metrics.tau = m["tau"].get<double>();
  }
  if (m.contains("rcond")) {
    if (!m["rcond"].is_number()) throw ConfigError("metrics.rcond", "expected a number");
    metrics.rcond = m["rcond"].get<double>();
  }
  if (m.contains("epochs") && !m["epochs"].is_null()) {
    const json& e = m["epochs"];
    if (!e.is_array()) throw ConfigError("metrics.epochs", "expected an array");
    std::vector<std::size_t> epochs;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i].is_number_integer() || e[i].get<std::int64_t>() < 0) {
        throw ConfigError(fmt::format("metrics.epochs[{}]", i), "expected a nonnegative integer");
      }
      epochs.push_back(e[i].get<std::size_t>());
    }
    metrics.epochs = epochs;
    cfg.schedule.metric_epochs = std::move(epochs);
  }
  const auto choice = [&](std::string_view key, std::initializer_list<std::string_view> allowed) -> std::optional<std::string> {
    const std::string name(key);
    if (!m.contains(name)) return std::nullopt;
    const std::string path = join_path("metrics", name);
    if (!m[name].is_string()) throw ConfigError(path, "expected a string");
    const auto v = m[name].get<std::string>();
    for (auto a : allowed) if (a == v) return v;
    throw ConfigError(path, fmt::format("unsupported value \"{}\"", v));
  };
  if (auto s = choice("split", {"train", "test"})) metrics.split = *s == "train" ? MetricSplit::train : MetricSplit::test;
  if (auto s = choice("nrc4_centering", {"centered", "uncentered"})) {
    metrics.nrc4_centering = *s == "centered" ? nrc::Centering::centered : nrc::Centering::uncentered;
  }
  if (auto s = choice("nrc3_convention", {"previous_layer", "same_layer"})) {
    metrics.nrc3_convention = *s == "previous_layer" ? nrc::Nrc3Convention::previous_layer
                                                     : nrc::Nrc3Convention::same_layer;
  }
  if (m.contains("nrc3_include_input")) {
    metrics.nrc3_include_input = detail::as_bool(m["nrc3_include_input"], "metrics.nrc3_include_input");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot read config file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

DatasetConfig parse_dataset_config(const std::string& text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("invalid JSON: {}", e.what()));
  }
  auto cfg = dataset_from_json(j, "", base);
  return cfg;
}

std::string to_json_text(const ExperimentConfig& cfg) {
  json arch{{"activation", to_string(cfg.architecture.activation)}};
  if (cfg.architecture.hidden_widths) {
    arch["hidden_widths"] = *cfg.architecture.hidden_widths;
  } else {
    arch["depth"] = cfg.architecture.depth.value_or(1);
    arch["width"] = cfg.architecture.width.value_or(1);
  }
  if (cfg.architecture.input_dim) arch["input_dim"] = *cfg.architecture.input_dim;
  if (cfg.architecture.output_dim) arch["output_dim"] = *cfg.architecture.output_dim;
  json sched = detail::to_json(cfg.schedule);
  const json metric_epochs = sched["metric_epochs"];
  sched.erase("metric_epochs");
  json metrics{{"tau", cfg.metrics.tau},
               {"epochs", metric_epochs},
               {"split", cfg.metrics.split == MetricSplit::train ? "train" : "test"},
               {"nrc4_centering",
                cfg.metrics.nrc4_centering == nrc::Centering::centered ? "centered" : "uncentered"},
               {"nrc3_convention", cfg.metrics.nrc3_convention == nrc::Nrc3Convention::previous_layer
                                       ? "previous_layer"
                                       : "same_layer"},
               {"nrc3_include_input", cfg.metrics.nrc3_include_input},
               {"rcond", cfg.metrics.rcond}};
  if (cfg.metrics.k) metrics["k"] = *cfg.metrics.k;
  if (cfg.metrics.r) metrics["r"] = *cfg.metrics.r;
  json j{{"schema_version", cfg.schema_version},
         {"name", cfg.name},
         {"output_dir", cfg.output_dir.string()},
         {"dataset", dataset_to_json(cfg.dataset)},
         {"architecture", arch},
         {"schedule", sched},
         {"metrics", metrics}};
  return j.dump(2);
}

}  // namespace runner
}  // namespace deepnrc
