// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fully connected regressor trained with plain SGD. Layer l maps
// H^{l-1} (N x h_{l-1}) to H^l = act(H^{l-1} W^l^T + 1 b^l^T); the last
// layer is linear.

#pragma once

#include "deepnrc/activation.hpp"
#include "deepnrc/data.hpp"
#include "deepnrc/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace deepnrc::nn {

using linalg::DenseMatrix;
using linalg::Index;
using linalg::Vector;

struct MlpArchitecture {
  Index input_dim = 1;
  std::vector<Index> hidden_widths;  // L - 1 entries
  Index output_dim = 1;
  Activation hidden_activation = Activation::relu;

  /// An "L-layer MLP of width h": L - 1 hidden layers of width h and a
  /// linear output layer.
  static MlpArchitecture uniform(Index input_dim, std::size_t depth, Index width,
                                 Index output_dim, Activation act = Activation::relu);

  std::size_t depth() const noexcept { return hidden_widths.size() + 1; }
  /// Input width of layer l (1-based).
  Index fan_in(std::size_t layer) const;
  /// Output width of layer l (1-based).
  Index fan_out(std::size_t layer) const;
  void validate() const;

  bool operator==(const MlpArchitecture&) const = default;
};

struct DenseLayer {
  DenseMatrix weight;  // fan_out x fan_in
  Vector bias;         // fan_out
};

struct MlpParameters {
  MlpArchitecture architecture;
  std::vector<DenseLayer> layers;  // layers[l - 1] holds W^l, b^l

  /// Shapes chain from d through the hidden widths to t; entries finite.
  void validate() const;
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  double loss = 0.0;
};

/// Weight initialization. he: N(0, 2/fan_in) relu, N(0, 1/fan_in) tanh, zero
/// biases. torch_default: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
/// biases, the nn.Linear reset rule.
enum class InitScheme { he, torch_default };

std::string_view to_string(InitScheme s) noexcept;
std::optional<InitScheme> parse_init_scheme(std::string_view s) noexcept;

struct TrainSchedule {
  double initial_lr = 0.1;
  std::vector<std::size_t> milestones;  // epochs at which lr *= decay_factor
  double decay_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t epochs = 1000;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::he;
  std::vector<std::size_t> metric_epochs;

  void validate() const;
};

/// Milestones at floor(E/3) and floor(2E/3), dropping zeros and duplicates.
std::vector<std::size_t> default_milestones(std::size_t epochs);

/// {0, 10, 50, 100, 200, ...} up to `epochs`, always ending at `epochs`.
std::vector<std::size_t> default_metric_epochs(std::size_t epochs);

/// Post-activation features of every hidden layer for one input batch.
struct ActivationTrace {
  DenseMatrix input;                // H^0 = X
  std::vector<DenseMatrix> hidden;  // H^1 .. H^{L-1}
  DenseMatrix predictions;          // H^{L-1} W^L^T + 1 b^L^T

  /// H^l for l in [0, L-1].
  const DenseMatrix& features(std::size_t layer) const;
};

struct OptimizerState {
  std::vector<DenseLayer> velocity;
  std::size_t epoch = 0;
  double lr = 0.0;

  static OptimizerState zeros_like(const MlpParameters& params, double lr);
};

struct EpochLoss {
  std::size_t epoch = 0;  // 0 = before any update
  double train_mse = 0.0;
  double test_mse = 0.0;
  double lr = 0.0;  // rate used during this epoch (0 for epoch 0)
};

struct TrainResult {
  MlpParameters params;
  std::vector<EpochLoss> history;
};

/// Weights ~ N(0, 2/fan_in) for relu, N(0, 1/fan_in) for tanh; zero biases.
MlpParameters init_params(const MlpArchitecture& arch, std::uint64_t seed);
MlpParameters init_params(const MlpArchitecture& arch, std::uint64_t seed, InitScheme scheme);

ActivationTrace forward_capture(const MlpParameters& params, const DenseMatrix& x);

/// Predictions only, without retaining hidden features.
DenseMatrix predict(const MlpParameters& params, const DenseMatrix& x);

/// (1/N) ||pred - Y||_F^2.
double mse_loss(const DenseMatrix& pred, const DenseMatrix& y);

/// Exact gradients of mse_loss(f(X), Y) with respect to every W^l and b^l.
MlpGradients backward(const MlpParameters& params, const DenseMatrix& x, const DenseMatrix& y);

/// g = grad + weight_decay * W (biases undecayed); v = momentum * v + g;
/// param -= lr * v, with lr taken from `state`.
void sgd_step(MlpParameters& params, const MlpGradients& grads, OptimizerState& state,
              const TrainSchedule& schedule);

/// initial_lr * decay_factor^(number of milestones <= epoch).
double lr_at(const TrainSchedule& schedule, std::size_t epoch);

using MetricCallback =
    std::function<void(std::size_t epoch, const ActivationTrace& train_trace,
                       const MlpParameters& params, const EpochLoss& loss)>;
using EpochCallback = std::function<void(const EpochLoss&)>;

/// Seeded mini-batch SGD. Calls `on_metrics` with a full train-split trace at
/// each of schedule.metric_epochs (epoch 0 is the initialization).
/// Throws TrainingDivergedError on a non-finite loss.
TrainResult train(const MlpArchitecture& arch, const TrainSchedule& schedule,
                  const data::SplitDataset& split, const MetricCallback& on_metrics = {},
                  const EpochCallback& on_epoch = {});

/// Same, starting from the given parameters instead of init_params.
TrainResult train_from(MlpParameters init, const TrainSchedule& schedule,
                       const data::SplitDataset& split, const MetricCallback& on_metrics = {},
                       const EpochCallback& on_epoch = {});

struct Checkpoint {
  MlpParameters params;
  TrainSchedule schedule;
  std::size_t epoch = 0;
};

/// Tensor container whose JSON header is {arch, schedule, epoch, seed};
/// tensors are W^1, b^1, ..., W^L, b^L (biases stored as 1 x h rows).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace deepnrc::nn
