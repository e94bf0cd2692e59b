// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/nn.hpp"

#include "deepnrc/container.hpp"
#include "deepnrc/error.hpp"
#include "deepnrc/rng.hpp"
#include "json_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace deepnrc::nn {

MlpArchitecture MlpArchitecture::uniform(Index input_dim, std::size_t depth, Index width,
                                         Index output_dim, Activation act) {
  if (depth < 1) throw ConfigError("architecture.depth", "must be at least 1");
  return MlpArchitecture{input_dim, std::vector<Index>(depth - 1, width), output_dim, act};
}

Index MlpArchitecture::fan_in(std::size_t layer) const {
  if (layer < 1 || layer > depth()) throw ShapeError(fmt::format("no layer {}", layer));
  return layer == 1 ? input_dim : hidden_widths[layer - 2];
}

Index MlpArchitecture::fan_out(std::size_t layer) const {
  if (layer < 1 || layer > depth()) throw ShapeError(fmt::format("no layer {}", layer));
  return layer == depth() ? output_dim : hidden_widths[layer - 1];
}

void MlpArchitecture::validate() const {
  if (input_dim < 1) throw ConfigError("architecture.input_dim", "must be at least 1");
  if (output_dim < 1) throw ConfigError("architecture.output_dim", "must be at least 1");
  for (std::size_t i = 0; i < hidden_widths.size(); ++i) {
    if (hidden_widths[i] < 1) {
      throw ConfigError(fmt::format("architecture.hidden_widths[{}]", i), "must be at least 1");
    }
  }
}

void MlpParameters::validate() const {
  architecture.validate();
  if (layers.size() != architecture.depth()) {
    throw ShapeError(fmt::format("parameters: {} layers for a depth-{} architecture",
                                 layers.size(), architecture.depth()));
  }
  for (std::size_t l = 1; l <= layers.size(); ++l) {
    const auto& layer = layers[l - 1];
    if (layer.weight.rows() != architecture.fan_out(l) ||
        layer.weight.cols() != architecture.fan_in(l) ||
        layer.bias.size() != architecture.fan_out(l)) {
      throw ShapeError(fmt::format("parameters: layer {} has W {}x{}, b {}; expected {}x{}", l,
                                   layer.weight.rows(), layer.weight.cols(), layer.bias.size(),
                                   architecture.fan_out(l), architecture.fan_in(l)));
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw NumericalError(fmt::format("parameters: layer {} has non-finite entries", l));
    }
  }
}

void TrainSchedule::validate() const {
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) {
    throw ConfigError("schedule.lr", "must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("schedule.momentum", "must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("schedule.weight_decay", "must be nonnegative");
  }
  if (!(decay_factor > 0.0) || !std::isfinite(decay_factor)) {
    throw ConfigError("schedule.gamma", "must be positive");
  }
  if (batch_size < 1) throw ConfigError("schedule.batch_size", "must be at least 1");
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw ConfigError("schedule.milestones", "must be strictly increasing");
    }
  }
  for (std::size_t i = 1; i < metric_epochs.size(); ++i) {
    if (metric_epochs[i] <= metric_epochs[i - 1]) {
      throw ConfigError("metrics.epochs", "must be strictly increasing");
    }
  }
  if (!metric_epochs.empty() && metric_epochs.back() > epochs) {
    throw ConfigError("metrics.epochs",
                      fmt::format("epoch {} exceeds training length {}", metric_epochs.back(), epochs));
  }
}

std::vector<std::size_t> default_milestones(std::size_t epochs) {
  std::vector<std::size_t> out;
  for (std::size_t m : {epochs / 3, 2 * epochs / 3}) {
    if (m > 0 && (out.empty() || m > out.back())) out.push_back(m);
  }
  return out;
}

std::vector<std::size_t> default_metric_epochs(std::size_t epochs) {
  std::vector<std::size_t> out;
  for (std::size_t e : {std::size_t{0}, std::size_t{10}, std::size_t{50}}) {
    if (e <= epochs) out.push_back(e);
  }
  for (std::size_t e = 100; e <= epochs; e += 100) out.push_back(e);
  if (out.back() != epochs) out.push_back(epochs);
  return out;
}

const DenseMatrix& ActivationTrace::features(std::size_t layer) const {
  if (layer == 0) return input;
  if (layer > hidden.size()) {
    throw ShapeError(fmt::format("trace has no hidden layer {}", layer));
  }
  return hidden[layer - 1];
}

OptimizerState OptimizerState::zeros_like(const MlpParameters& params, double lr) {
  OptimizerState state;
  state.lr = lr;
  for (const auto& layer : params.layers) {
    state.velocity.push_back({DenseMatrix::Zero(layer.weight.rows(), layer.weight.cols()),
                              Vector::Zero(layer.bias.size())});
  }
  return state;
}

std::string_view to_string(InitScheme s) noexcept {
  return s == InitScheme::he ? "he" : "torch_default";
}

std::optional<InitScheme> parse_init_scheme(std::string_view s) noexcept {
  if (s == "he") return InitScheme::he;
  if (s == "torch_default") return InitScheme::torch_default;
  return std::nullopt;
}

MlpParameters init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  return init_params(arch, seed, InitScheme::he);
}

MlpParameters init_params(const MlpArchitecture& arch, std::uint64_t seed, InitScheme scheme) {
  arch.validate();
  auto engine = rng::make_engine(seed, rng::kStreamInit);
  MlpParameters params{arch, {}};
  const double gain = arch.hidden_activation == Activation::relu ? 2.0 : 1.0;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    const Index fan_in = arch.fan_in(l);
    const Index fan_out = arch.fan_out(l);
    if (scheme == InitScheme::he) {
      const double sd = std::sqrt(gain / static_cast<double>(fan_in));
      params.layers.push_back(
          {rng::normal_matrix(engine, fan_out, fan_in, sd), Vector::Zero(fan_out)});
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer layer{DenseMatrix(fan_out, fan_in), Vector(fan_out)};
    for (Index i = 0; i < fan_out; ++i) {
      for (Index j = 0; j < fan_in; ++j) layer.weight(i, j) = u(engine);
    }
    for (Index i = 0; i < fan_out; ++i) layer.bias(i) = u(engine);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void require_input_shape(const MlpParameters& params, const DenseMatrix& x) {
  if (x.cols() != params.architecture.input_dim) {
    throw ShapeError(fmt::format("forward: input has {} columns, network expects {}", x.cols(),
                                 params.architecture.input_dim));
  }
  if (params.layers.size() != params.architecture.depth()) {
    throw ShapeError("forward: parameter list does not match architecture depth");
  }
}

DenseMatrix affine(const DenseMatrix& h, const DenseLayer& layer) {
  DenseMatrix z = h * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

}  // namespace

ActivationTrace forward_capture(const MlpParameters& params, const DenseMatrix& x) {
  require_input_shape(params, x);
  ActivationTrace trace;
  trace.input = x;
  const std::size_t depth = params.layers.size();
  trace.hidden.reserve(depth - 1);
  const DenseMatrix* prev = &trace.input;
  for (std::size_t l = 1; l < depth; ++l) {
    DenseMatrix z = affine(*prev, params.layers[l - 1]);
    apply_activation(params.architecture.hidden_activation, z);
    trace.hidden.push_back(std::move(z));
    prev = &trace.hidden.back();
  }
  trace.predictions = affine(*prev, params.layers.back());
  return trace;
}

DenseMatrix predict(const MlpParameters& params, const DenseMatrix& x) {
  require_input_shape(params, x);
  DenseMatrix h = x;
  const std::size_t depth = params.layers.size();
  for (std::size_t l = 1; l < depth; ++l) {
    h = affine(h, params.layers[l - 1]);
    apply_activation(params.architecture.hidden_activation, h);
  }
  return affine(h, params.layers.back());
}

double mse_loss(const DenseMatrix& pred, const DenseMatrix& y) {
  if (pred.rows() != y.rows() || pred.cols() != y.cols()) {
    throw ShapeError(fmt::format("mse_loss: prediction {}x{} vs target {}x{}", pred.rows(),
                                 pred.cols(), y.rows(), y.cols()));
  }
  return (pred - y).squaredNorm() / static_cast<double>(pred.rows());
}

MlpGradients backward(const MlpParameters& params, const DenseMatrix& x, const DenseMatrix& y) {
  ActivationTrace trace = forward_capture(params, x);
  if (y.rows() != x.rows() || y.cols() != params.architecture.output_dim) {
    throw ShapeError(fmt::format("backward: targets {}x{} for {} samples and output dim {}",
                                 y.rows(), y.cols(), x.rows(), params.architecture.output_dim));
  }
  const double n = static_cast<double>(x.rows());
  const Activation act = params.architecture.hidden_activation;
  const std::size_t depth = params.layers.size();

  MlpGradients grads;
  grads.layers.resize(depth);
  DenseMatrix residual = trace.predictions - y;
  grads.loss = residual.squaredNorm() / n;
  DenseMatrix delta = residual * (2.0 / n);  // dLoss / dZ^L
  for (std::size_t l = depth; l >= 1; --l) {
    const DenseMatrix& a_prev = trace.features(l - 1);
    auto& g = grads.layers[l - 1];
    g.weight.noalias() = delta.transpose() * a_prev;
    g.bias = delta.colwise().sum().transpose();
    if (l == 1) break;
    DenseMatrix back = delta * params.layers[l - 1].weight;
    // a_prev = act(z_prev): relu'(z) = [a > 0], tanh'(z) = 1 - a^2.
    if (act == Activation::relu) {
      back = (a_prev.array() > 0.0).select(back, 0.0);
    } else {
      back.array() *= 1.0 - a_prev.array().square();
    }
    delta = std::move(back);
  }
  return grads;
}

void sgd_step(MlpParameters& params, const MlpGradients& grads, OptimizerState& state,
              const TrainSchedule& schedule) {
  if (grads.layers.size() != params.layers.size() ||
      state.velocity.size() != params.layers.size()) {
    throw ShapeError("sgd_step: gradient / state layer count mismatch");
  }
  const double lr = state.lr;
  const double mu = schedule.momentum;
  const double wd = schedule.weight_decay;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    auto& v = state.velocity[l];
    const auto& g = grads.layers[l];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
        g.bias.size() != p.bias.size()) {
      throw ShapeError(fmt::format("sgd_step: gradient shape mismatch at layer {}", l + 1));
    }
    v.weight = mu * v.weight + g.weight + wd * p.weight;
    v.bias = mu * v.bias + g.bias;
    p.weight -= lr * v.weight;
    p.bias -= lr * v.bias;
  }
}

double lr_at(const TrainSchedule& schedule, std::size_t epoch) {
  const auto passed = std::count_if(schedule.milestones.begin(), schedule.milestones.end(),
                                    [epoch](std::size_t m) { return m <= epoch; });
  return schedule.initial_lr * std::pow(schedule.decay_factor, static_cast<double>(passed));
}

TrainResult train(const MlpArchitecture& arch, const TrainSchedule& schedule,
                  const data::SplitDataset& split, const MetricCallback& on_metrics,
                  const EpochCallback& on_epoch) {
  return train_from(init_params(arch, schedule.seed, schedule.init), schedule, split, on_metrics, on_epoch);
}

TrainResult train_from(MlpParameters params, const TrainSchedule& schedule,
                       const data::SplitDataset& split, const MetricCallback& on_metrics,
                       const EpochCallback& on_epoch) {
  schedule.validate();
  params.validate();
  const auto& train_x = split.train.inputs;
  const auto& train_y = split.train.targets;
  const auto& test_x = split.test.inputs;
  const auto& test_y = split.test.targets;
  if (train_x.cols() != params.architecture.input_dim ||
      test_x.cols() != params.architecture.input_dim) {
    throw ShapeError(fmt::format("train: data has {} input columns, network expects {}",
                                 train_x.cols(), params.architecture.input_dim));
  }
  if (train_y.cols() != params.architecture.output_dim ||
      test_y.cols() != params.architecture.output_dim) {
    throw ShapeError(fmt::format("train: data has {} target columns, network outputs {}",
                                 train_y.cols(), params.architecture.output_dim));
  }

  TrainResult result;
  OptimizerState state = OptimizerState::zeros_like(params, schedule.initial_lr);
  auto shuffle_engine = rng::make_engine(schedule.seed, rng::kStreamShuffle);
  const Index n = train_x.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto metric_it = schedule.metric_epochs.begin();

  const auto evaluate = [&](std::size_t epoch, double lr) {
    EpochLoss loss{epoch, 0.0, 0.0, lr};
    const bool snapshot = metric_it != schedule.metric_epochs.end() && *metric_it == epoch;
    if (snapshot && on_metrics) {
      const ActivationTrace trace = forward_capture(params, train_x);
      loss.train_mse = mse_loss(trace.predictions, train_y);
      loss.test_mse = mse_loss(predict(params, test_x), test_y);
      if (!std::isfinite(loss.train_mse) || !std::isfinite(loss.test_mse)) {
        throw TrainingDivergedError(epoch, fmt::format("training diverged at epoch {}", epoch));
      }
      on_metrics(epoch, trace, params, loss);
    } else {
      loss.train_mse = mse_loss(predict(params, train_x), train_y);
      loss.test_mse = mse_loss(predict(params, test_x), test_y);
    }
    if (snapshot) ++metric_it;
    if (!std::isfinite(loss.train_mse) || !std::isfinite(loss.test_mse)) {
      throw TrainingDivergedError(epoch, fmt::format("training diverged at epoch {}", epoch));
    }
    result.history.push_back(loss);
    if (on_epoch) on_epoch(loss);
  };

  evaluate(0, 0.0);
  const auto batch = static_cast<Index>(schedule.batch_size);
  DenseMatrix xb, yb;
  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    state.epoch = epoch - 1;
    state.lr = lr_at(schedule, epoch - 1);
    std::shuffle(order.begin(), order.end(), shuffle_engine);
    for (Index start = 0; start < n; start += batch) {
      const Index rows = std::min(batch, n - start);
      xb.resize(rows, train_x.cols());
      yb.resize(rows, train_y.cols());
      for (Index i = 0; i < rows; ++i) {
        const Index src = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = train_x.row(src);
        yb.row(i) = train_y.row(src);
      }
      const MlpGradients grads = backward(params, xb, yb);
      if (!std::isfinite(grads.loss)) {
        throw TrainingDivergedError(
            epoch, fmt::format("training diverged at epoch {} (non-finite batch loss)", epoch));
      }
      sgd_step(params, grads, state, schedule);
    }
    evaluate(epoch, state.lr);
  }
  state.epoch = schedule.epochs;
  result.params = std::move(params);
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ckpt.params.validate();
  detail::json header{{"format", "deepnrc-checkpoint"},
                      {"version", 1},
                      {"arch", detail::to_json(ckpt.params.architecture)},
                      {"schedule", detail::to_json(ckpt.schedule)},
                      {"epoch", ckpt.epoch},
                      {"seed", ckpt.schedule.seed}};
  container::TensorFile file{header.dump(), {}};
  for (const auto& layer : ckpt.params.layers) {
    file.tensors.push_back(layer.weight);
    file.tensors.push_back(layer.bias.transpose());
  }
  container::write(path, file);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto file = container::read(path);
  detail::json header;
  try {
    header = detail::json::parse(file.header);
  } catch (const detail::json::exception& e) {
    throw DataError(fmt::format("{}: bad checkpoint header: {}", path.string(), e.what()));
  }
  if (header.value("format", std::string{}) != "deepnrc-checkpoint") {
    throw DataError(fmt::format("{}: not a deepnrc checkpoint", path.string()));
  }
  Checkpoint ckpt;
  ckpt.params.architecture = detail::architecture_from_json(header.at("arch"), "arch");
  ckpt.schedule = detail::schedule_from_json(header.at("schedule"), "schedule");
  ckpt.epoch = header.at("epoch").get<std::size_t>();
  if (file.tensors.size() != 2 * ckpt.params.architecture.depth()) {
    throw DataError(fmt::format("{}: {} tensors for a depth-{} network", path.string(),
                                file.tensors.size(), ckpt.params.architecture.depth()));
  }
  for (std::size_t i = 0; i < file.tensors.size(); i += 2) {
    if (file.tensors[i + 1].rows() != 1) {
      throw DataError(fmt::format("{}: bias tensor {} is not a row", path.string(), i + 1));
    }
    ckpt.params.layers.push_back({file.tensors[i], file.tensors[i + 1].row(0).transpose()});
  }
  ckpt.params.validate();
  return ckpt;
}

}  // namespace deepnrc::nn
