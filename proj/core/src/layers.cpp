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

#include "posereg/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

namespace posereg {

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

namespace layers {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using ConstRowVec = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using RowVec = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

struct ConvGeometry {
  std::size_t batch, in_h, in_w, in_c, out_h, out_w, out_c, k, s, p;
  std::size_t patch() const { return k * k * in_c; }
  std::size_t rows() const { return batch * out_h * out_w; }
};

ConvGeometry conv_geometry(const Shape& in, const ConvSpec& spec) {
  if (in.size() != 4) {
    throw InvalidInput("conv2d: expected NHWC input, got " + shape_string(in));
  }
  const int oh = window_output_side(static_cast<int>(in[1]), spec.kernel, spec.stride, spec.pad);
  const int ow = window_output_side(static_cast<int>(in[2]), spec.kernel, spec.stride, spec.pad);
  if (oh < 1 || ow < 1) {
    throw InvalidInput("conv2d: kernel larger than padded input " + shape_string(in));
  }
  return {in[0],
          in[1],
          in[2],
          in[3],
          static_cast<std::size_t>(oh),
          static_cast<std::size_t>(ow),
          static_cast<std::size_t>(spec.out_channels),
          static_cast<std::size_t>(spec.kernel),
          static_cast<std::size_t>(spec.stride),
          static_cast<std::size_t>(spec.pad)};
}

template <typename T>
void check_weight(const Tensor<T>& weight, const Tensor<T>& bias, const Shape& expected, std::size_t out) {
  if (weight.shape() != expected) {
    throw InvalidInput("weight shape " + shape_string(weight.shape()) + " != expected " +
                       shape_string(expected));
  }
  if (bias.size() != out) {
    throw InvalidInput("bias length " + std::to_string(bias.size()) + " != " + std::to_string(out));
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                    const ConvSpec& spec, Tensor<T>& cols, Tensor<T>& output) {
  const ConvGeometry g = conv_geometry(input.shape(), spec);
  check_weight(weight, bias, {g.k, g.k, g.in_c, g.out_c}, g.out_c);
  const std::size_t patch = g.patch();
  cols.resize({g.rows(), patch});

  const T* src = input.data();
  T* dst = cols.data();
  const std::size_t row_bytes = g.in_c * sizeof(T);
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* image = src + b * g.in_h * g.in_w * g.in_c;
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.s + ky) - static_cast<std::ptrdiff_t>(g.p);
          for (std::size_t kx = 0; kx < g.k; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.s + kx) - static_cast<std::ptrdiff_t>(g.p);
            if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h) ||
                ix >= static_cast<std::ptrdiff_t>(g.in_w)) {
              std::memset(dst, 0, row_bytes);
            } else {
              std::memcpy(dst, image + (static_cast<std::size_t>(iy) * g.in_w + ix) * g.in_c, row_bytes);
            }
            dst += g.in_c;
          }
        }
      }
    }
  }

  output.resize({g.batch, g.out_h, g.out_w, g.out_c});
  MatMap<T> out(output.data(), g.rows(), g.out_c);
  out.noalias() = ConstMatMap<T>(cols.data(), g.rows(), patch) * ConstMatMap<T>(weight.data(), patch, g.out_c);
  out.rowwise() += ConstRowVec<T>(bias.data(), g.out_c);
}

template <typename T>
void conv2d_backward(const Tensor<T>& cols, const Shape& input_shape, const Tensor<T>& weight,
                     const ConvSpec& spec, const Tensor<T>& output_grad, Tensor<T>& weight_grad,
                     Tensor<T>& bias_grad, Tensor<T>* input_grad) {
  const ConvGeometry g = conv_geometry(input_shape, spec);
  const std::size_t patch = g.patch();
  if (cols.size() != g.rows() * patch || output_grad.size() != g.rows() * g.out_c) {
    throw InvalidInput("conv2d_backward: cache does not match gradient shape");
  }
  const ConstMatMap<T> dout(output_grad.data(), g.rows(), g.out_c);
  const ConstMatMap<T> colm(cols.data(), g.rows(), patch);

  weight_grad.resize({g.k, g.k, g.in_c, g.out_c});
  MatMap<T>(weight_grad.data(), patch, g.out_c).noalias() = colm.transpose() * dout;
  bias_grad.resize({g.out_c});
  RowVec<T>(bias_grad.data(), g.out_c) = dout.colwise().sum();

  if (!input_grad) return;
  RowMat<T> dcols(g.rows(), patch);
  dcols.noalias() = dout * ConstMatMap<T>(weight.data(), patch, g.out_c).transpose();

  input_grad->resize(input_shape);
  input_grad->fill(T{0});
  T* dimg = input_grad->data();
  const T* src = dcols.data();
  for (std::size_t b = 0; b < g.batch; ++b) {
    T* image = dimg + b * g.in_h * g.in_w * g.in_c;
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.s + ky) - static_cast<std::ptrdiff_t>(g.p);
          for (std::size_t kx = 0; kx < g.k; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.s + kx) - static_cast<std::ptrdiff_t>(g.p);
            if (iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.in_h) &&
                ix < static_cast<std::ptrdiff_t>(g.in_w)) {
              T* px = image + (static_cast<std::size_t>(iy) * g.in_w + ix) * g.in_c;
              for (std::size_t c = 0; c < g.in_c; ++c) px[c] += src[c];
            }
            src += g.in_c;
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const Tensor<T>& input, const MaxPoolSpec& spec,
                     std::vector<std::uint32_t>& argmax, Tensor<T>& output) {
  const Shape& in = input.shape();
  if (in.size() != 4) {
    throw InvalidInput("maxpool: expected NHWC input, got " + shape_string(in));
  }
  const std::size_t batch = in[0], h = in[1], w = in[2], c = in[3];
  const int ohi = window_output_side(static_cast<int>(h), spec.kernel, spec.stride, 0);
  const int owi = window_output_side(static_cast<int>(w), spec.kernel, spec.stride, 0);
  if (ohi < 1 || owi < 1) {
    throw InvalidInput("maxpool: window larger than input " + shape_string(in));
  }
  const auto oh = static_cast<std::size_t>(ohi), ow = static_cast<std::size_t>(owi);
  const auto k = static_cast<std::size_t>(spec.kernel), s = static_cast<std::size_t>(spec.stride);
  output.resize({batch, oh, ow, c});
  argmax.resize(output.size());

  const T* src = input.data();
  T* dst = output.data();
  std::uint32_t* arg = argmax.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * h * w * c;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t first = base + ((oy * s) * w + ox * s) * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
          dst[ch] = src[first + ch];
          arg[ch] = static_cast<std::uint32_t>(first + ch);
        }
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            if (ky == 0 && kx == 0) continue;
            const std::size_t at = base + ((oy * s + ky) * w + ox * s + kx) * c;
            for (std::size_t ch = 0; ch < c; ++ch) {
              if (src[at + ch] > dst[ch]) {
                dst[ch] = src[at + ch];
                arg[ch] = static_cast<std::uint32_t>(at + ch);
              }
            }
          }
        }
        dst += c;
        arg += c;
      }
    }
  }
}

template <typename T>
void maxpool_backward(const Tensor<T>& output_grad, const std::vector<std::uint32_t>& argmax,
                      const Shape& input_shape, Tensor<T>& input_grad) {
  if (argmax.size() != output_grad.size()) {
    throw InvalidInput("maxpool_backward: cache does not match gradient shape");
  }
  input_grad.resize(input_shape);
  input_grad.fill(T{0});
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    input_grad[argmax[i]] += output_grad[i];
  }
}

template <typename T>
void relu_forward(const Tensor<T>& input, Tensor<T>& output) {
  output.resize(input.shape());
  const T* src = input.data();
  T* dst = output.data();
  for (std::size_t i = 0; i < input.size(); ++i) dst[i] = src[i] > T{0} ? src[i] : T{0};
}

template <typename T>
void relu_backward(const Tensor<T>& output, const Tensor<T>& output_grad, Tensor<T>& input_grad) {
  if (output.size() != output_grad.size()) {
    throw InvalidInput("relu_backward: cache does not match gradient shape");
  }
  input_grad.resize(output.shape());
  for (std::size_t i = 0; i < output.size(); ++i) {
    input_grad[i] = output[i] > T{0} ? output_grad[i] : T{0};
  }
}

template <typename T>
void fc_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, Tensor<T>& output) {
  if (input.rank() != 2) {
    throw InvalidInput("fully connected: expected [B, features] input, got " + shape_string(input.shape()));
  }
  const std::size_t batch = input.dim(0), in = input.dim(1);
  const std::size_t out = bias.size();
  check_weight(weight, bias, {in, out}, out);
  output.resize({batch, out});
  MatMap<T> o(output.data(), batch, out);
  o.noalias() = ConstMatMap<T>(input.data(), batch, in) * ConstMatMap<T>(weight.data(), in, out);
  o.rowwise() += ConstRowVec<T>(bias.data(), out);
}

template <typename T>
void fc_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& output_grad,
                 Tensor<T>& weight_grad, Tensor<T>& bias_grad, Tensor<T>* input_grad) {
  const std::size_t batch = input.dim(0), in = input.dim(1);
  const std::size_t out = weight.dim(1);
  if (output_grad.size() != batch * out) {
    throw InvalidInput("fc_backward: gradient shape " + shape_string(output_grad.shape()) +
                       " does not match the forward pass");
  }
  const ConstMatMap<T> dout(output_grad.data(), batch, out);
  weight_grad.resize({in, out});
  MatMap<T>(weight_grad.data(), in, out).noalias() = ConstMatMap<T>(input.data(), batch, in).transpose() * dout;
  bias_grad.resize({out});
  RowVec<T>(bias_grad.data(), out) = dout.colwise().sum();
  if (input_grad) {
    input_grad->resize({batch, in});
    MatMap<T>(input_grad->data(), batch, in).noalias() =
        dout * ConstMatMap<T>(weight.data(), in, out).transpose();
  }
}

#define POSEREG_INSTANTIATE_LAYERS(T)                                                                    \
  template void conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const ConvSpec&, \
                                  Tensor<T>&, Tensor<T>&);                                               \
  template void conv2d_backward<T>(const Tensor<T>&, const Shape&, const Tensor<T>&, const ConvSpec&,    \
                                   const Tensor<T>&, Tensor<T>&, Tensor<T>&, Tensor<T>*);                \
  template void maxpool_forward<T>(const Tensor<T>&, const MaxPoolSpec&, std::vector<std::uint32_t>&,    \
                                   Tensor<T>&);                                                          \
  template void maxpool_backward<T>(const Tensor<T>&, const std::vector<std::uint32_t>&, const Shape&,   \
                                    Tensor<T>&);                                                         \
  template void relu_forward<T>(const Tensor<T>&, Tensor<T>&);                                           \
  template void relu_backward<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);                        \
  template void fc_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);         \
  template void fc_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,         \
                               Tensor<T>&, Tensor<T>*);

POSEREG_INSTANTIATE_LAYERS(float)
POSEREG_INSTANTIATE_LAYERS(double)

#undef POSEREG_INSTANTIATE_LAYERS

}  // namespace layers
}  // namespace posereg
