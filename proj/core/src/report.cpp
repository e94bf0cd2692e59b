// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/report.hpp"

#include "deepnrc/error.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace deepnrc::runner {

using detail::json;

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::complete: return "complete";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

RunStatus parse_status(const std::string& s) {
  if (s == "running") return RunStatus::running;
  if (s == "complete") return RunStatus::complete;
  if (s == "failed") return RunStatus::failed;
  throw DataError(fmt::format("manifest: unknown status \"{}\"", s));
}

template <typename T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return detail::number_or_null(*v);
  else return *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

// Non-finite values never reach the JSON layer (written as null).
double get_real(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

std::string cell(const std::optional<double>& v) {
  return v ? detail::format_double(*v) : std::string();
}

json manifest_json(const RunManifest& m) {
  json j{{"schema_version", kReportSchemaVersion},
         {"name", m.name},
         {"status", to_string(m.status)},
         {"software_version", m.software_version},
         {"config_sha256", m.config_sha256},
         {"config", m.config_json.empty() ? json(nullptr) : json::parse(m.config_json)},
         {"seeds", {{"data", m.data_seed}, {"train", m.train_seed}}},
         {"prng", m.prng},
         {"dataset",
          {{"fingerprint", m.dataset_fingerprint},
           {"provenance", m.dataset_provenance_json.empty()
                              ? json(nullptr)
                              : json::parse(m.dataset_provenance_json)},
           {"standardize", m.standardize},
           {"dropped_input_columns", m.dropped_input_columns},
           {"target_stable_rank", detail::number_or_null(m.target_stable_rank)}}},
         {"design_decisions",
          {{"tau", m.tau},
           {"activation", m.activation},
           {"init", m.init},
           {"hidden_widths", m.hidden_widths},
           {"milestones", m.milestones},
           {"gamma", m.gamma},
           {"weight_decay", m.weight_decay},
           {"nrc4_centering", m.nrc4_centering},
           {"nrc3_convention", m.nrc3_convention},
           {"metric_split", m.metric_split},
           {"subspace_dim", m.subspace_dim},
           {"intrinsic_rank", opt(m.intrinsic_rank)},
           {"metric_epochs", m.metric_epochs},
           {"covariance_normalization", "1/N"},
           {"features_centered", true}}},
         {"timing",
          {{"wall_seconds", m.wall_seconds},
           {"mean_epoch_seconds", m.mean_epoch_seconds},
           {"epochs_completed", m.epochs_completed}}},
         {"final_train_mse", opt(m.final_train_mse)},
         {"final_test_mse", opt(m.final_test_mse)}};
  if (m.status == RunStatus::failed) {
    j["failure"] = {{"stage", m.failed_stage}, {"error", m.error}};
  }
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.name = j.at("name").get<std::string>();
  m.status = parse_status(j.at("status").get<std::string>());
  if (j.contains("failure")) {
    m.failed_stage = j["failure"].at("stage").get<std::string>();
    m.error = j["failure"].at("error").get<std::string>();
  }
  m.software_version = j.at("software_version").get<std::string>();
  m.config_sha256 = j.at("config_sha256").get<std::string>();
  if (!j.at("config").is_null()) m.config_json = j["config"].dump(2);
  m.data_seed = j.at("seeds").at("data").get<std::uint64_t>();
  m.train_seed = j.at("seeds").at("train").get<std::uint64_t>();
  m.prng = j.at("prng").get<std::string>();
  const json& ds = j.at("dataset");
  m.dataset_fingerprint = ds.at("fingerprint").get<std::string>();
  if (!ds.at("provenance").is_null()) m.dataset_provenance_json = ds["provenance"].dump();
  m.standardize = ds.at("standardize").get<bool>();
  m.dropped_input_columns = ds.at("dropped_input_columns").get<std::vector<std::size_t>>();
  m.target_stable_rank = get_real(ds, "target_stable_rank");
  const json& dd = j.at("design_decisions");
  m.tau = dd.at("tau").get<double>();
  m.activation = dd.at("activation").get<std::string>();
  m.init = dd.at("init").get<std::string>();
  m.hidden_widths = dd.at("hidden_widths").get<std::vector<linalg::Index>>();
  m.milestones = dd.at("milestones").get<std::vector<std::size_t>>();
  m.gamma = dd.at("gamma").get<double>();
  m.weight_decay = dd.at("weight_decay").get<double>();
  m.nrc4_centering = dd.at("nrc4_centering").get<std::string>();
  m.nrc3_convention = dd.at("nrc3_convention").get<std::string>();
  m.metric_split = dd.at("metric_split").get<std::string>();
  m.subspace_dim = dd.at("subspace_dim").get<linalg::Index>();
  m.intrinsic_rank = get_opt<linalg::Index>(dd, "intrinsic_rank");
  m.metric_epochs = dd.at("metric_epochs").get<std::vector<std::size_t>>();
  const json& t = j.at("timing");
  m.wall_seconds = t.at("wall_seconds").get<double>();
  m.mean_epoch_seconds = t.at("mean_epoch_seconds").get<double>();
  m.epochs_completed = t.at("epochs_completed").get<std::size_t>();
  m.final_train_mse = get_opt<double>(j, "final_train_mse");
  m.final_test_mse = get_opt<double>(j, "final_test_mse");
  return m;
}

json certificate_json(const nrc::Prop1Certificate& c) {
  return json{{"epsilon1", c.epsilon1}, {"epsilon2", c.epsilon2}, {"lhs", c.lhs},
              {"bound", c.bound},       {"holds", c.holds},       {"energy_spread", c.energy_spread}};
}

json layer_json(const nrc::LayerMetrics& m) {
  return json{{"layer", m.layer_index},
              {"nrc1", detail::number_or_null(m.nrc1_noise)},
              {"nrc2", opt(m.nrc2_cka)},
              {"nrc3", opt(m.nrc3_alignment)},
              {"nrc4_mse", detail::number_or_null(m.nrc4_mse)},
              {"stable_rank_H", opt(m.stable_rank_H)},
              {"stable_rank_W", opt(m.stable_rank_W)},
              {"eigen_tie_flag", m.eigen_tie_flag},
              {"degenerate", m.degenerate},
              {"certificate", m.certificate ? certificate_json(*m.certificate) : json(nullptr)}};
}

nrc::LayerMetrics layer_from_json(const json& j) {
  nrc::LayerMetrics m;
  m.layer_index = j.at("layer").get<std::size_t>();
  m.nrc1_noise = get_real(j, "nrc1");
  m.nrc2_cka = get_opt<double>(j, "nrc2");
  m.nrc3_alignment = get_opt<double>(j, "nrc3");
  m.nrc4_mse = get_real(j, "nrc4_mse");
  m.stable_rank_H = get_opt<double>(j, "stable_rank_H");
  m.stable_rank_W = get_opt<double>(j, "stable_rank_W");
  m.eigen_tie_flag = j.at("eigen_tie_flag").get<bool>();
  m.degenerate = j.at("degenerate").get<bool>();
  if (!j.at("certificate").is_null()) {
    const json& c = j["certificate"];
    m.certificate = nrc::Prop1Certificate{c.at("epsilon1").get<double>(), c.at("epsilon2").get<double>(),
                                          c.at("lhs").get<double>(),      c.at("bound").get<double>(),
                                          c.at("holds").get<bool>(),      c.at("energy_spread").get<double>()};
  }
  return m;
}

json lowrank_json(const nrc::LowRankMetrics& m) {
  return json{{"layer", m.layer_index},
              {"rank_r_noise", detail::number_or_null(m.rank_r_noise)},
              {"signal_alignment", opt(m.signal_alignment)},
              {"noise_alignment", opt(m.noise_alignment)},
              {"stable_rank_H", opt(m.stable_rank_H)}};
}

nrc::LowRankMetrics lowrank_from_json(const json& j) {
  return nrc::LowRankMetrics{j.at("layer").get<std::size_t>(), get_real(j, "rank_r_noise"),
                             get_opt<double>(j, "signal_alignment"),
                             get_opt<double>(j, "noise_alignment"), get_opt<double>(j, "stable_rank_H")};
}

json snapshot_json(const MetricSnapshot& s) {
  const auto& r = s.report;
  json layers = json::array();
  for (const auto& m : r.layers) layers.push_back(layer_json(m));
  json j{{"epoch", r.epoch},
         {"model_train_mse", detail::number_or_null(r.model_train_mse)},
         {"target_stable_rank", detail::number_or_null(r.target_stable_rank)},
         {"first_collapsed_layer", opt(r.first_collapsed_layer)},
         {"subspace_dim", r.subspace_dim},
         {"tau", r.tau},
         {"output_nrc3", opt(r.output_nrc3)},
         {"output_stable_rank_W", opt(r.output_stable_rank_W)},
         {"layers", layers}};
  if (!s.lowrank.empty()) {
    json lr = json::array();
    for (const auto& m : s.lowrank) lr.push_back(lowrank_json(m));
    j["lowrank"] = lr;
  }
  return j;
}

MetricSnapshot snapshot_from_json(const json& j) {
  MetricSnapshot s;
  auto& r = s.report;
  r.epoch = j.at("epoch").get<std::size_t>();
  r.model_train_mse = get_real(j, "model_train_mse");
  r.target_stable_rank = get_real(j, "target_stable_rank");
  r.first_collapsed_layer = get_opt<std::size_t>(j, "first_collapsed_layer");
  r.subspace_dim = j.at("subspace_dim").get<linalg::Index>();
  r.tau = j.at("tau").get<double>();
  r.output_nrc3 = get_opt<double>(j, "output_nrc3");
  r.output_stable_rank_W = get_opt<double>(j, "output_stable_rank_W");
  for (const auto& l : j.at("layers")) r.layers.push_back(layer_from_json(l));
  if (j.contains("lowrank")) {
    for (const auto& l : j["lowrank"]) s.lowrank.push_back(lowrank_from_json(l));
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("missing run data: {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  std::filesystem::create_directories(run_dir);
  write_text(run_dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  try {
    return manifest_from_json(read_json_file(run_dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest.json: {}", e.what()));
  }
}

std::string layers_csv(const RunRecord& record) {
  std::string out = "epoch,layer,nrc1,nrc2,nrc3,nrc4_mse,stable_rank_H,stable_rank_W,first_collapsed\n";
  for (const auto& s : record.snapshots) {
    const auto& r = s.report;
    for (const auto& m : r.layers) {
      const bool first = r.first_collapsed_layer && *r.first_collapsed_layer == m.layer_index;
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.epoch, m.layer_index,
                         detail::format_double(m.nrc1_noise), cell(m.nrc2_cka),
                         cell(m.nrc3_alignment), detail::format_double(m.nrc4_mse),
                         cell(m.stable_rank_H), cell(m.stable_rank_W), first ? 1 : 0);
    }
  }
  return out;
}

std::string loss_csv(const RunRecord& record) {
  std::string out = "epoch,train_mse,test_mse\n";
  for (const auto& e : record.history) {
    out += fmt::format("{},{},{}\n", e.epoch, detail::format_double(e.train_mse),
                       detail::format_double(e.test_mse));
  }
  return out;
}

std::string lowrank_csv(const RunRecord& record) {
  std::string out = "epoch,layer,rank_r_noise,signal_alignment,noise_alignment,stable_rank_H\n";
  for (const auto& s : record.snapshots) {
    for (const auto& m : s.lowrank) {
      out += fmt::format("{},{},{},{},{},{}\n", s.report.epoch, m.layer_index,
                         detail::format_double(m.rank_r_noise), cell(m.signal_alignment),
                         cell(m.noise_alignment), cell(m.stable_rank_H));
    }
  }
  return out;
}

std::string report_json(const RunRecord& record) {
  json loss = json::array();
  for (const auto& e : record.history) {
    loss.push_back({{"epoch", e.epoch},
                    {"train_mse", detail::number_or_null(e.train_mse)},
                    {"test_mse", detail::number_or_null(e.test_mse)},
                    {"lr", e.lr}});
  }
  json metrics = json::array();
  for (const auto& s : record.snapshots) metrics.push_back(snapshot_json(s));
  json j{{"schema_version", kReportSchemaVersion},
         {"manifest", manifest_json(record.manifest)},
         {"loss", loss},
         {"metrics", metrics}};
  return j.dump(2) + "\n";
}

void emit_report(const std::filesystem::path& run_dir, const RunRecord& record) {
  for (std::size_t i = 1; i < record.snapshots.size(); ++i) {
    if (record.snapshots[i].report.epoch <= record.snapshots[i - 1].report.epoch) {
      throw DataError("emit_report: snapshot epochs must strictly increase");
    }
  }
  std::filesystem::create_directories(run_dir);
  write_text(run_dir / "layers.csv", layers_csv(record));
  write_text(run_dir / "loss.csv", loss_csv(record));
  const bool has_lowrank = std::any_of(record.snapshots.begin(), record.snapshots.end(),
                                       [](const MetricSnapshot& s) { return !s.lowrank.empty(); });
  if (has_lowrank) write_text(run_dir / "lowrank.csv", lowrank_csv(record));
  write_text(run_dir / "report.json", report_json(record));
}

RunRecord read_report(const std::filesystem::path& run_dir) {
  const json j = read_json_file(run_dir / "report.json");
  try {
    RunRecord record;
    record.manifest = manifest_from_json(j.at("manifest"));
    for (const auto& e : j.at("loss")) {
      record.history.push_back({e.at("epoch").get<std::size_t>(), get_real(e, "train_mse"),
                                get_real(e, "test_mse"), e.at("lr").get<double>()});
    }
    for (const auto& s : j.at("metrics")) record.snapshots.push_back(snapshot_from_json(s));
    return record;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("report.json: {}", e.what()));
  }
}

}  // namespace deepnrc::runner
