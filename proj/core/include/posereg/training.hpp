// Copyright (c) 2026, The posereg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POSEREG_TRAINING_HPP_
#define POSEREG_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posereg/checkpoint.hpp"
#include "posereg/dataset.hpp"
#include "posereg/network.hpp"
#include "posereg/rng.hpp"

namespace posereg {

/// Per-sample loss sum(w * (gt - pred)^2) / (2 * n) with n = pred.size()
/// (26 for pose vectors). Throws InvalidInput on length mismatch.
template <typename T>
T weighted_l2_loss(std::span<const T> pred, std::span<const T> gt, std::span<const T> w);

/// d loss / d pred = w * (pred - gt) / n, written to out.
template <typename T>
void loss_grad(std::span<const T> pred, std::span<const T> gt, std::span<const T> w, std::span<T> out);

/// Batch mean of the per-sample loss over [B, n] tensors. When grad is
/// given it receives the gradient of that mean (per-sample gradient / B).
template <typename T>
double batch_loss(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& w, Tensor<T>* grad = nullptr);

template <typename T>
struct OptimizerState {
  std::vector<LayerParams<T>> velocity;  // zero-initialized, shaped like the parameters
  double lr = 1e-2;
  double momentum = 0.9;

  static OptimizerState for_params(const Parameters<T>& p, double lr, double momentum);
};

/// v <- momentum * v - lr * g;  p <- p + v.
template <typename T>
void sgd_momentum_step(Parameters<T>& params, const std::vector<LayerParams<T>>& grads, OptimizerState<T>& state);

/// `size` indices drawn uniformly from [0, n) with replacement. Throws
/// InvalidInput when n is 0.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t size, Rng& rng);

struct TrainConfig {
  std::size_t batch = 256;
  double lr = 1e-2;
  double momentum = 0.9;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0 disables the validation column
};

struct LogRow {
  std::uint64_t iteration = 0;
  double loss = 0.0;  // batch loss before the update
  double lr = 0.0;
  double wall_ms = 0.0;
  std::optional<double> val_pck;  // PCK@0.2 on the validation crops
};

struct TrainOptions {
  std::span<const TrainCrop> validation;     // used when eval_every > 0
  std::function<void(const LogRow&)> on_row;  // called after each iteration
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LogRow> log;
};

/// Minibatch SGD with momentum on the weighted L2 loss, starting from
/// `init`. The returned checkpoint's iteration counts on from
/// start_iteration. Throws NonFiniteLoss when a batch loss is NaN or Inf.
TrainResult train(const TrainConfig& config, std::span<const TrainCrop> data, const Parameters<float>& init,
                  std::uint64_t start_iteration = 0, const TrainOptions& options = {});

std::string log_csv_header(bool with_val);
std::string log_csv_row(const LogRow& row, bool with_val);
void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& rows);

}  // namespace posereg

#endif  // POSEREG_TRAINING_HPP_
