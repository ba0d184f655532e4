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

#include "posereg/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <variant>

#include "posereg/rng.hpp"
#include "posereg/training.hpp"

namespace posereg {

namespace {

// True when both passes took the same branch at every ReLU and max pool.
bool same_pattern(const NetworkConfig& config, const ForwardCache<double>& a, const ForwardCache<double>& b) {
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    if (std::holds_alternative<ReluSpec>(config.layers[l])) {
      const Tensor<double>& x = a.inputs[l];
      const Tensor<double>& y = b.inputs[l];
      for (std::size_t i = 0; i < x.size(); ++i) {
        if ((x[i] > 0) != (y[i] > 0)) return false;
      }
    } else if (std::holds_alternative<MaxPoolSpec>(config.layers[l])) {
      if (a.argmax[l] != b.argmax[l]) return false;
    }
  }
  return true;
}

}  // namespace

GradcheckResult gradcheck(const NetworkConfig& config, const GradcheckOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  Rng rng(options.seed);
  Parameters<double> params = init_parameters<double>(config, rng.next());
  for (auto& l : params.layers) {
    for (double& b : l.bias) b = rng.uniform(-0.05, 0.05);
  }

  const Shape in = config.input_shape();
  const std::size_t b = options.batch;
  Tensor<double> batch({b, in[0], in[1], in[2]});
  for (double& v : batch) v = rng.uniform(-1.0, 1.0);
  Tensor<double> target({b, kPoseDim}), weight({b, kPoseDim});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const double w = rng.bernoulli(0.75) ? 1.0 : 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        target[i * kPoseDim + 2 * j + c] = rng.uniform();
        weight[i * kPoseDim + 2 * j + c] = w;
      }
    }
  }

  ForwardCache<double> cache;
  Tensor<double> out_grad;
  batch_loss(forward(params, batch, cache), target, weight, &out_grad);
  const Gradients<double> grads = backward(params, cache, out_grad, false);

  GradcheckResult r;
  const double eps = options.epsilon;
  ForwardCache<double> probe;
  auto full_loss = [&] { return batch_loss(forward(params, batch, probe), target, weight); };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Tensor<double>& activation = cache.inputs[l];
    const bool fc = std::holds_alternative<FullyConnectedSpec>(config.layers[l]);
    const bool last = l + 1 == config.layers.size();
    Tensor<double> fc_out = last ? cache.output : cache.inputs[l + 1];
    // Weights as [out, in] so one unit's fan-in is contiguous.
    std::vector<double> columns;
    if (fc) {
      const Tensor<double>& w = params.layers[l].weight;
      const std::size_t in = w.dim(0), out = w.dim(1);
      columns.resize(w.size());
      for (std::size_t i = 0; i < in; ++i) {
        for (std::size_t o = 0; o < out; ++o) columns[o * in + i] = w[i * out + o];
      }
    }
    // A fully connected parameter only moves one output unit, so only that
    // unit is recomputed before running the remaining layers.
    auto loss_at = [&](std::size_t unit) {
      if (!fc) return batch_loss(forward_from(params, activation, l), target, weight);
      const LayerParams<double>& lp = params.layers[l];
      const std::size_t in = activation.dim(1), out = lp.bias.size();
      for (std::size_t n = 0; n < activation.dim(0); ++n) {
        double z = lp.bias[unit];
        const double* x = activation.data() + n * in;
        const double* c = columns.data() + unit * in;
        for (std::size_t i = 0; i < in; ++i) z += x[i] * c[i];
        fc_out[n * out + unit] = z;
      }
      const double loss = batch_loss(forward_from(params, fc_out, l + 1), target, weight);
      const Tensor<double>& base = last ? cache.output : cache.inputs[l + 1];
      for (std::size_t n = 0; n < activation.dim(0); ++n) fc_out[n * out + unit] = base[n * out + unit];
      return loss;
    };
    for (int role = 0; role < 2; ++role) {
      Tensor<double>& p = role == 0 ? params.layers[l].weight : params.layers[l].bias;
      const Tensor<double>& g = role == 0 ? grads.layers[l].weight : grads.layers[l].bias;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t unit = role == 0 && fc ? i % params.layers[l].bias.size() : i;
        double* column_entry = role == 0 && fc ? &columns[unit * activation.dim(1) + i / params.layers[l].bias.size()] : nullptr;
        const double saved = p[i];
        auto set = [&](double v) {
          p[i] = v;
          if (column_entry) *column_entry = v;
        };
        set(saved + eps);
        const double up = loss_at(unit);
        set(saved - eps);
        const double down = loss_at(unit);
        set(saved);
        double numeric = (up - down) / (2 * eps);
        const double analytic = g[i];
        auto rel = [&](double n) { return std::abs(analytic - n) / std::max({std::abs(analytic), std::abs(n), options.floor}); };
        double err = rel(numeric);
        if (err > options.tolerance) {
          bool kink = false;
          for (double h = eps; h >= eps * 1e-4; h /= 10) {
            p[i] = saved + h;
            const double u = full_loss();
            const bool up_same = same_pattern(config, cache, probe);
            p[i] = saved - h;
            const double d = full_loss();
            const bool down_same = same_pattern(config, cache, probe);
            p[i] = saved;
            if (up_same && down_same) {
              if (kink) {
                numeric = (u - d) / (2 * h);
                err = rel(numeric);
              }
              break;
            }
            kink = true;
          }
          if (kink) ++r.kinks;
        }
        ++r.checked;
        if (err > r.max_rel_error || r.worst.empty()) {
          r.max_rel_error = std::max(err, r.max_rel_error);
          char buf[160];
          std::snprintf(buf, sizeof(buf), "layer %zu %s[%zu]: analytic %.6e numeric %.6e", l,
                        role == 0 ? "weight" : "bias", i, analytic, numeric);
          r.worst = buf;
        }
      }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace posereg
