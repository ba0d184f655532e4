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

#include "posereg/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "posereg/error.hpp"
#include "posereg/evaluation.hpp"
#include "posereg/inference.hpp"

namespace posereg {

namespace {

template <typename T>
void check_lengths(std::size_t a, std::size_t b, std::size_t c, const char* what) {
  if (a != b || a != c) {
    throw InvalidInput(std::string(what) + ": lengths " + std::to_string(a) + ", " + std::to_string(b) + ", " +
                       std::to_string(c) + " differ");
  }
}

double validation_pck(const Parameters<float>& params, std::span<const TrainCrop> crops) {
  const std::vector<PoseVector> preds = predict_crops(params, crops, false);
  std::vector<Skeleton> p, g;
  p.reserve(crops.size());
  g.reserve(crops.size());
  for (std::size_t i = 0; i < crops.size(); ++i) {
    p.push_back(Skeleton::from_vector(preds[i]));
    g.push_back(target_skeleton(crops[i]));
  }
  return pck(p, g, 0.2).overall;
}

}  // namespace

template <typename T>
T weighted_l2_loss(std::span<const T> pred, std::span<const T> gt, std::span<const T> w) {
  check_lengths<T>(pred.size(), gt.size(), w.size(), "weighted_l2_loss");
  T sum = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const T d = gt[k] - pred[k];
    sum += w[k] * d * d;
  }
  return pred.empty() ? T(0) : sum / static_cast<T>(2 * pred.size());
}

template <typename T>
void loss_grad(std::span<const T> pred, std::span<const T> gt, std::span<const T> w, std::span<T> out) {
  check_lengths<T>(pred.size(), gt.size(), w.size(), "loss_grad");
  if (out.size() != pred.size()) throw InvalidInput("loss_grad: output length differs");
  const T n = static_cast<T>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) out[k] = w[k] * (pred[k] - gt[k]) / n;
}

template <typename T>
double batch_loss(const Tensor<T>& pred, const Tensor<T>& gt, const Tensor<T>& w, Tensor<T>* grad) {
  if (pred.shape() != gt.shape() || pred.shape() != w.shape() || pred.rank() != 2) {
    throw InvalidInput("batch_loss: expected equal [B, n] shapes, got " + shape_string(pred.shape()) + ", " +
                       shape_string(gt.shape()) + ", " + shape_string(w.shape()));
  }
  const std::size_t b = pred.dim(0), n = pred.dim(1);
  if (grad) grad->resize(pred.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = [&](const Tensor<T>& t) { return t.span().subspan(i * n, n); };
    total += static_cast<double>(weighted_l2_loss<T>(row(pred), row(gt), row(w)));
    if (grad) {
      std::span<T> g = grad->span().subspan(i * n, n);
      loss_grad<T>(row(pred), row(gt), row(w), g);
      for (T& v : g) v /= static_cast<T>(b);
    }
  }
  return b ? total / static_cast<double>(b) : 0.0;
}

template <typename T>
OptimizerState<T> OptimizerState<T>::for_params(const Parameters<T>& p, double lr, double momentum) {
  OptimizerState s;
  s.lr = lr;
  s.momentum = momentum;
  for (const auto& l : p.layers) {
    LayerParams<T> v = l;
    v.weight.fill(T(0));
    v.bias.fill(T(0));
    s.velocity.push_back(std::move(v));
  }
  return s;
}

template <typename T>
void sgd_momentum_step(Parameters<T>& params, const std::vector<LayerParams<T>>& grads, OptimizerState<T>& state) {
  if (grads.size() != params.layers.size() || state.velocity.size() != params.layers.size()) {
    throw InvalidInput("sgd_momentum_step: gradient or velocity does not match the parameters");
  }
  const T mu = static_cast<T>(state.momentum), lr = static_cast<T>(state.lr);
  auto step = [&](Tensor<T>& p, const Tensor<T>& g, Tensor<T>& v) {
    if (p.size() != g.size() || p.size() != v.size()) throw InvalidInput("sgd_momentum_step: tensor size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = mu * v[i] - lr * g[i];
      p[i] += v[i];
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    step(params.layers[l].weight, grads[l].weight, state.velocity[l].weight);
    step(params.layers[l].bias, grads[l].bias, state.velocity[l].bias);
  }
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t size, Rng& rng) {
  if (n == 0) throw InvalidInput("sample_batch: the training set is empty");
  std::vector<std::size_t> idx(size);
  for (auto& i : idx) i = rng.index(n);
  return idx;
}

TrainResult train(const TrainConfig& config, std::span<const TrainCrop> data, const Parameters<float>& init,
                  std::uint64_t start_iteration, const TrainOptions& options) {
  init.check_shapes();
  if (config.batch == 0) throw InvalidInput("train: batch size must be positive");
  if (!(config.lr > 0.0) || !std::isfinite(config.lr)) throw InvalidInput("train: learning rate must be positive");
  TrainResult result{{init, start_iteration + config.iterations, config.seed}, {}};
  if (config.iterations == 0) return result;
  if (data.empty()) throw InvalidInput("train: the training set is empty");

  const Shape in = init.config.input_shape();
  const std::size_t per = shape_volume(in);
  for (const auto& c : data) {
    if (c.pixels.shape() != in) {
      throw InvalidInput("train: crop shape " + shape_string(c.pixels.shape()) + " does not match network input " +
                         shape_string(in));
    }
  }

  Parameters<float>& params = result.checkpoint.params;
  OptimizerState<float> opt = OptimizerState<float>::for_params(params, config.lr, config.momentum);
  Rng rng(config.seed);
  ForwardCache<float> cache;
  Gradients<float> grads;
  const std::size_t b = config.batch;
  Tensor<float> batch({b, in[0], in[1], in[2]});
  Tensor<float> target({b, kPoseDim}), weight({b, kPoseDim}), out_grad;
  const bool with_val = config.eval_every > 0 && !options.validation.empty();
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const std::vector<std::size_t> idx = sample_batch(data.size(), b, rng);
    for (std::size_t i = 0; i < b; ++i) {
      const TrainCrop& c = data[idx[i]];
      std::copy(c.pixels.begin(), c.pixels.end(), batch.data() + i * per);
      for (std::size_t k = 0; k < kPoseDim; ++k) {
        target[i * kPoseDim + k] = static_cast<float>(c.target[k]);
        weight[i * kPoseDim + k] = static_cast<float>(c.weights[k]);
      }
    }
    const Tensor<float>& pred = forward(params, batch, cache);
    const double loss = batch_loss(pred, target, weight, &out_grad);
    const std::uint64_t iteration = start_iteration + it + 1;
    if (!std::isfinite(loss)) {
      throw NonFiniteLoss("loss became non-finite at iteration " + std::to_string(iteration));
    }
    backward(params, cache, out_grad, grads, false);
    sgd_momentum_step(params, grads.layers, opt);

    LogRow row{iteration, loss, config.lr,
               std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(), {}};
    if (with_val && ((it + 1) % config.eval_every == 0 || it + 1 == config.iterations)) {
      row.val_pck = validation_pck(params, options.validation);
    }
    if (options.on_row) options.on_row(row);
    result.log.push_back(row);
  }
  return result;
}

std::string log_csv_header(bool with_val) { return with_val ? "iteration,loss,lr,wall_ms,val_pck" : "iteration,loss,lr,wall_ms"; }

std::string log_csv_row(const LogRow& row, bool with_val) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.6g,%.1f", static_cast<unsigned long long>(row.iteration), row.loss,
                row.lr, row.wall_ms);
  std::string s = buf;
  if (with_val) {
    s += ',';
    if (row.val_pck) {
      std::snprintf(buf, sizeof(buf), "%.3f", *row.val_pck);
      s += buf;
    }
  }
  return s;
}

void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  bool with_val = false;
  for (const auto& r : rows) with_val = with_val || r.val_pck.has_value();
  out << log_csv_header(with_val) << '\n';
  for (const auto& r : rows) out << log_csv_row(r, with_val) << '\n';
}

#define POSEREG_INSTANTIATE(T)                                                                                      \
  template T weighted_l2_loss<T>(std::span<const T>, std::span<const T>, std::span<const T>);                      \
  template void loss_grad<T>(std::span<const T>, std::span<const T>, std::span<const T>, std::span<T>);             \
  template double batch_loss<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*);                 \
  template struct OptimizerState<T>;                                                                                \
  template void sgd_momentum_step<T>(Parameters<T>&, const std::vector<LayerParams<T>>&, OptimizerState<T>&);

POSEREG_INSTANTIATE(float)
POSEREG_INSTANTIATE(double)
#undef POSEREG_INSTANTIATE

}  // namespace posereg
