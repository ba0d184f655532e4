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

#ifndef POSEREG_LAYERS_HPP_
#define POSEREG_LAYERS_HPP_

#include <cstdint>
#include <vector>

#include "posereg/tensor.hpp"

namespace posereg {

struct ConvSpec {
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};
struct ReluSpec {
  friend bool operator==(const ReluSpec&, const ReluSpec&) = default;
};
struct MaxPoolSpec {
  int kernel = 2;
  int stride = 2;
  friend bool operator==(const MaxPoolSpec&, const MaxPoolSpec&) = default;
};
struct FlattenSpec {
  friend bool operator==(const FlattenSpec&, const FlattenSpec&) = default;
};
struct FullyConnectedSpec {
  int out_features = 1;
  friend bool operator==(const FullyConnectedSpec&, const FullyConnectedSpec&) = default;
};

/// Output side of a convolution or pooling window sweep.
constexpr int window_output_side(int in_side, int kernel, int stride, int pad) {
  return (in_side + 2 * pad - kernel) / stride + 1;
}

// Kernels for the fixed layer set. All activations are NHWC; convolution
// weights are [k, k, C_in, C_out]; fully connected weights are [in, out].
namespace layers {

/// `cols` receives the im2col matrix [B * OH * OW, k * k * C_in] and is
/// needed again by conv2d_backward.
template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                    const ConvSpec& spec, Tensor<T>& cols, Tensor<T>& output);

/// Accumulates nothing: overwrites weight_grad and bias_grad. input_grad is
/// skipped when null.
template <typename T>
void conv2d_backward(const Tensor<T>& cols, const Shape& input_shape, const Tensor<T>& weight,
                     const ConvSpec& spec, const Tensor<T>& output_grad, Tensor<T>& weight_grad,
                     Tensor<T>& bias_grad, Tensor<T>* input_grad);

/// Ties resolve to the first maximal element in row-major window order.
/// `argmax` stores the flat input index each output element was read from.
template <typename T>
void maxpool_forward(const Tensor<T>& input, const MaxPoolSpec& spec,
                     std::vector<std::uint32_t>& argmax, Tensor<T>& output);

template <typename T>
void maxpool_backward(const Tensor<T>& output_grad, const std::vector<std::uint32_t>& argmax,
                      const Shape& input_shape, Tensor<T>& input_grad);

template <typename T>
void relu_forward(const Tensor<T>& input, Tensor<T>& output);

/// Gradient passes where the forward output was strictly positive.
template <typename T>
void relu_backward(const Tensor<T>& output, const Tensor<T>& output_grad, Tensor<T>& input_grad);

/// input [B, in] -> output [B, out].
template <typename T>
void fc_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                Tensor<T>& output);

template <typename T>
void fc_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& output_grad,
                 Tensor<T>& weight_grad, Tensor<T>& bias_grad, Tensor<T>* input_grad);

}  // namespace layers
}  // namespace posereg

#endif  // POSEREG_LAYERS_HPP_
