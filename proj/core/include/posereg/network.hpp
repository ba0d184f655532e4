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

#ifndef POSEREG_NETWORK_HPP_
#define POSEREG_NETWORK_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "posereg/layers.hpp"
#include "posereg/skeleton.hpp"
#include "posereg/tensor.hpp"

namespace posereg {

using LayerSpec = std::variant<ConvSpec, ReluSpec, MaxPoolSpec, FlattenSpec, FullyConnectedSpec>;

/// An ordered layer stack over a square input.
///
/// Canonical text form, one layer per line:
///
///   input side=64 channels=3
///   conv out=16 k=5 s=2 p=2
///   relu
///   maxpool k=2 s=2
///   flatten
///   fc out=26
///
/// '#' starts a comment. The last layer must be a fully connected layer with
/// output_dim (26) features, and every fc must be preceded by a flat shape.
struct NetworkConfig {
  int input_side = 64;
  int input_channels = 3;
  std::vector<LayerSpec> layers;
  int output_dim = static_cast<int>(kPoseDim);

  /// Per-sample shape after each layer ([H, W, C] or [features]). Throws
  /// InvalidInput describing the first layer that does not fit.
  std::vector<Shape> layer_output_shapes() const;
  void validate() const { (void)layer_output_shapes(); }
  Shape input_shape() const;

  std::string canonical_text() const;
  /// Throws DataError naming the offending line.
  static NetworkConfig parse(std::string_view text);

  /// "paper-224" or "desk-64"; throws InvalidInput for anything else.
  static NetworkConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

std::string layer_text(const LayerSpec& layer);

template <typename T>
struct LayerParams {
  Tensor<T> weight;  // empty for layers without parameters
  Tensor<T> bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Learnable tensors, one LayerParams per layer of `config`.
template <typename T>
struct Parameters {
  NetworkConfig config;
  std::vector<LayerParams<T>> layers;

  std::size_t count() const;
  /// Throws InvalidInput if any tensor shape disagrees with config.
  void check_shapes() const;
  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Expected [weight, bias] shapes for each layer (empty shapes for layers
/// without parameters).
std::vector<std::pair<Shape, Shape>> parameter_shapes(const NetworkConfig& config);

/// Xavier-uniform weights on +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Conv fans count the kernel window: fan_in = k*k*C_in, fan_out = k*k*C_out.
template <typename T>
Parameters<T> init_parameters(const NetworkConfig& config, std::uint64_t seed);

template <typename To, typename From>
Parameters<To> cast_parameters(const Parameters<From>& p) {
  Parameters<To> out{p.config, {}};
  out.layers.reserve(p.layers.size());
  for (const auto& l : p.layers) out.layers.push_back({tensor_cast<To>(l.weight), tensor_cast<To>(l.bias)});
  return out;
}

/// Intermediates of one forward pass, reused across calls to avoid
/// reallocation.
template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> inputs;  // inputs[i] feeds layer i
  std::vector<Tensor<T>> cols;    // im2col buffers (conv layers only)
  std::vector<std::vector<std::uint32_t>> argmax;
  Tensor<T> output;
};

template <typename T>
struct Gradients {
  std::vector<LayerParams<T>> layers;
  Tensor<T> input;  // empty when not requested
};

/// batch is [B, side, side, channels]; returns [B, output_dim].
template <typename T>
const Tensor<T>& forward(const Parameters<T>& params, const Tensor<T>& batch, ForwardCache<T>& cache);

/// Forward without keeping a cache.
template <typename T>
Tensor<T> predict(const Parameters<T>& params, const Tensor<T>& batch);

/// Runs layers [first_layer, end) on an activation that would have been the
/// input of first_layer.
template <typename T>
Tensor<T> forward_from(const Parameters<T>& params, const Tensor<T>& activation, std::size_t first_layer);

/// Gradients of sum(outputs * output_grad) with respect to every parameter
/// and, if requested, to the input batch.
template <typename T>
void backward(const Parameters<T>& params, const ForwardCache<T>& cache, const Tensor<T>& output_grad,
              Gradients<T>& grads, bool want_input_grad = true);

template <typename T>
Gradients<T> backward(const Parameters<T>& params, const ForwardCache<T>& cache, const Tensor<T>& output_grad,
                      bool want_input_grad = true) {
  Gradients<T> g;
  backward(params, cache, output_grad, g, want_input_grad);
  return g;
}

}  // namespace posereg

#endif  // POSEREG_NETWORK_HPP_
