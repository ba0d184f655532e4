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

#include "posereg/network.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "posereg/error.hpp"
#include "posereg/rng.hpp"

namespace posereg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::string_view kDesk64 = R"(input side=64 channels=3
conv out=16 k=5 s=2 p=2
relu
maxpool k=2 s=2
conv out=32 k=3 s=1 p=1
relu
maxpool k=2 s=2
conv out=32 k=3 s=1 p=1
relu
flatten
fc out=256
relu
fc out=26
)";

// Five conv + three fc, pooling after conv 1, 2 and 5.
constexpr std::string_view kPaper224 = R"(input side=224 channels=3
conv out=96 k=11 s=4 p=0
relu
maxpool k=2 s=2
conv out=256 k=5 s=1 p=2
relu
maxpool k=2 s=2
conv out=512 k=3 s=1 p=1
relu
conv out=512 k=3 s=1 p=1
relu
conv out=512 k=3 s=1 p=1
relu
maxpool k=2 s=2
flatten
fc out=2048
relu
fc out=2048
relu
fc out=26
)";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string layer_text(const LayerSpec& layer) {
  return std::visit(
      overloaded{
          [](const ConvSpec& c) {
            return "conv out=" + std::to_string(c.out_channels) + " k=" + std::to_string(c.kernel) +
                   " s=" + std::to_string(c.stride) + " p=" + std::to_string(c.pad);
          },
          [](const ReluSpec&) { return std::string("relu"); },
          [](const MaxPoolSpec& m) {
            return "maxpool k=" + std::to_string(m.kernel) + " s=" + std::to_string(m.stride);
          },
          [](const FlattenSpec&) { return std::string("flatten"); },
          [](const FullyConnectedSpec& f) { return "fc out=" + std::to_string(f.out_features); },
      },
      layer);
}

Shape NetworkConfig::input_shape() const {
  return {static_cast<std::size_t>(input_side), static_cast<std::size_t>(input_side),
          static_cast<std::size_t>(input_channels)};
}

std::vector<Shape> NetworkConfig::layer_output_shapes() const {
  if (input_side < 1 || input_channels < 1) {
    throw InvalidInput("network config: input side and channels must be positive");
  }
  std::vector<Shape> shapes;
  Shape cur = input_shape();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "network config layer " + std::to_string(i) + " (" + layer_text(layers[i]) + "): ";
    const bool spatial = cur.size() == 3;
    std::visit(overloaded{
                   [&](const ConvSpec& c) {
                     if (!spatial) throw InvalidInput(where + "needs a spatial input");
                     if (c.kernel < 1 || c.stride < 1 || c.pad < 0 || c.out_channels < 1) {
                       throw InvalidInput(where + "requires k, s, out >= 1 and p >= 0");
                     }
                     const int oh = window_output_side(static_cast<int>(cur[0]), c.kernel, c.stride, c.pad);
                     const int ow = window_output_side(static_cast<int>(cur[1]), c.kernel, c.stride, c.pad);
                     if (static_cast<int>(cur[0]) + 2 * c.pad < c.kernel || oh < 1 || ow < 1) {
                       throw InvalidInput(where + "kernel does not fit input " + shape_string(cur));
                     }
                     cur = {static_cast<std::size_t>(oh), static_cast<std::size_t>(ow),
                            static_cast<std::size_t>(c.out_channels)};
                   },
                   [&](const ReluSpec&) {},
                   [&](const MaxPoolSpec& m) {
                     if (!spatial) throw InvalidInput(where + "needs a spatial input");
                     if (m.kernel < 1 || m.stride < 1) throw InvalidInput(where + "requires k, s >= 1");
                     if (static_cast<int>(cur[0]) < m.kernel || static_cast<int>(cur[1]) < m.kernel) {
                       throw InvalidInput(where + "window does not fit input " + shape_string(cur));
                     }
                     cur = {static_cast<std::size_t>(window_output_side(static_cast<int>(cur[0]), m.kernel, m.stride, 0)),
                            static_cast<std::size_t>(window_output_side(static_cast<int>(cur[1]), m.kernel, m.stride, 0)),
                            cur[2]};
                   },
                   [&](const FlattenSpec&) { cur = {shape_volume(cur)}; },
                   [&](const FullyConnectedSpec& f) {
                     if (spatial) throw InvalidInput(where + "needs a flat input; insert flatten");
                     if (f.out_features < 1) throw InvalidInput(where + "requires out >= 1");
                     cur = {static_cast<std::size_t>(f.out_features)};
                   },
               },
               layers[i]);
    shapes.push_back(cur);
  }
  if (layers.empty() || !std::holds_alternative<FullyConnectedSpec>(layers.back())) {
    throw InvalidInput("network config: the last layer must be fc");
  }
  if (cur != Shape{static_cast<std::size_t>(output_dim)}) {
    throw InvalidInput("network config: output has " + shape_string(cur) + " features, expected " +
                       std::to_string(output_dim));
  }
  return shapes;
}

std::string NetworkConfig::canonical_text() const {
  std::string out = "input side=" + std::to_string(input_side) + " channels=" + std::to_string(input_channels) + "\n";
  for (const auto& l : layers) out += layer_text(l) + "\n";
  return out;
}

NetworkConfig NetworkConfig::parse(std::string_view text) {
  NetworkConfig config;
  config.layers.clear();
  bool saw_input = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) -> DataError {
      return DataError("network config line " + std::to_string(line_no) + " ('" + line + "'): " + why);
    };

    std::istringstream tokens(line);
    std::string kind;
    tokens >> kind;
    std::map<std::string, int> args;
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw fail("expected key=value, got '" + tok + "'");
      try {
        std::size_t used = 0;
        const int v = std::stoi(tok.substr(eq + 1), &used);
        if (used != tok.size() - eq - 1) throw std::invalid_argument("trailing");
        args[tok.substr(0, eq)] = v;
      } catch (const std::exception&) {
        throw fail("value of '" + tok.substr(0, eq) + "' is not an integer");
      }
    }
    auto take = [&](const char* key, std::optional<int> fallback = std::nullopt) {
      auto it = args.find(key);
      if (it == args.end()) {
        if (fallback) return *fallback;
        throw fail(std::string("missing ") + key + "=");
      }
      const int v = it->second;
      args.erase(it);
      return v;
    };

    if (kind == "input") {
      if (saw_input || !config.layers.empty()) throw fail("input must appear once, first");
      saw_input = true;
      config.input_side = take("side");
      config.input_channels = take("channels", 3);
    } else if (kind == "conv") {
      config.layers.push_back(ConvSpec{take("out"), take("k"), take("s", 1), take("p", 0)});
    } else if (kind == "relu") {
      config.layers.push_back(ReluSpec{});
    } else if (kind == "maxpool") {
      const int k = take("k");
      config.layers.push_back(MaxPoolSpec{k, take("s", k)});
    } else if (kind == "flatten") {
      config.layers.push_back(FlattenSpec{});
    } else if (kind == "fc") {
      config.layers.push_back(FullyConnectedSpec{take("out")});
    } else {
      throw fail("unknown layer kind '" + kind + "'");
    }
    if (!args.empty()) throw fail("unknown key '" + args.begin()->first + "'");
  }
  if (!saw_input) throw DataError("network config: missing 'input' line");
  try {
    config.validate();
  } catch (const InvalidInput& e) {
    throw DataError(e.what());
  }
  return config;
}

NetworkConfig NetworkConfig::preset(std::string_view name) {
  if (name == "desk-64") return parse(kDesk64);
  if (name == "paper-224") return parse(kPaper224);
  throw InvalidInput("unknown network preset '" + std::string(name) + "' (known: desk-64, paper-224)");
}

std::vector<std::string> NetworkConfig::preset_names() { return {"desk-64", "paper-224"}; }

std::vector<std::pair<Shape, Shape>> parameter_shapes(const NetworkConfig& config) {
  const auto outs = config.layer_output_shapes();
  std::vector<std::pair<Shape, Shape>> shapes;
  Shape cur = config.input_shape();
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const auto& l = config.layers[i];
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      const auto k = static_cast<std::size_t>(c->kernel);
      const auto o = static_cast<std::size_t>(c->out_channels);
      shapes.push_back({{k, k, cur[2], o}, {o}});
    } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
      const auto o = static_cast<std::size_t>(f->out_features);
      shapes.push_back({{cur[0], o}, {o}});
    } else {
      shapes.push_back({{}, {}});
    }
    cur = outs[i];
  }
  return shapes;
}

template <typename T>
std::size_t Parameters<T>::count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename T>
void Parameters<T>::check_shapes() const {
  const auto expected = parameter_shapes(config);
  if (expected.size() != layers.size()) {
    throw InvalidInput("parameters: " + std::to_string(layers.size()) + " layers, config has " +
                       std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const bool has = !expected[i].first.empty();
    const Shape w = has ? expected[i].first : Shape{};
    const Shape b = has ? expected[i].second : Shape{};
    if ((has && (layers[i].weight.shape() != w || layers[i].bias.shape() != b)) ||
        (!has && (!layers[i].weight.empty() || !layers[i].bias.empty()))) {
      throw InvalidInput("parameters: layer " + std::to_string(i) + " has weight " +
                         shape_string(layers[i].weight.shape()) + ", expected " + shape_string(w));
    }
  }
}

template <typename T>
Parameters<T> init_parameters(const NetworkConfig& config, std::uint64_t seed) {
  const auto shapes = parameter_shapes(config);
  Rng rng(seed);
  Parameters<T> p{config, {}};
  p.layers.resize(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& [ws, bs] = shapes[i];
    if (ws.empty()) continue;
    std::size_t fan_in, fan_out;
    if (ws.size() == 4) {
      fan_in = ws[0] * ws[1] * ws[2];
      fan_out = ws[0] * ws[1] * ws[3];
    } else {
      fan_in = ws[0];
      fan_out = ws[1];
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor<T> w(ws);
    for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
    p.layers[i] = {std::move(w), Tensor<T>(bs, T{0})};
  }
  return p;
}

namespace {

template <typename T>
void run_layer(const Parameters<T>& params, std::size_t i, const Tensor<T>& in, Tensor<T>& out,
               Tensor<T>& cols, std::vector<std::uint32_t>& argmax) {
  const auto& lp = params.layers[i];
  std::visit(overloaded{
                 [&](const ConvSpec& c) { layers::conv2d_forward(in, lp.weight, lp.bias, c, cols, out); },
                 [&](const ReluSpec&) { layers::relu_forward(in, out); },
                 [&](const MaxPoolSpec& m) { layers::maxpool_forward(in, m, argmax, out); },
                 [&](const FlattenSpec&) {
                   out = in;
                   out.reshape({in.dim(0), in.size() / in.dim(0)});
                 },
                 [&](const FullyConnectedSpec&) { layers::fc_forward(in, lp.weight, lp.bias, out); },
             },
             params.config.layers[i]);
}

template <typename T>
void check_batch(const Parameters<T>& params, const Tensor<T>& batch) {
  const Shape want = params.config.input_shape();
  if (batch.rank() != 4 || batch.dim(0) < 1 || Shape(batch.shape().begin() + 1, batch.shape().end()) != want) {
    throw InvalidInput("forward: batch shape " + shape_string(batch.shape()) + " does not match network input [B, " +
                       std::to_string(want[0]) + ", " + std::to_string(want[1]) + ", " + std::to_string(want[2]) + "]");
  }
}

}  // namespace

template <typename T>
const Tensor<T>& forward(const Parameters<T>& params, const Tensor<T>& batch, ForwardCache<T>& cache) {
  check_batch(params, batch);
  const std::size_t n = params.config.layers.size();
  if (params.layers.size() != n) throw InvalidInput("forward: parameters do not match config");
  cache.inputs.resize(n);
  cache.cols.resize(n);
  cache.argmax.resize(n);
  cache.inputs[0] = batch;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor<T>& out = i + 1 < n ? cache.inputs[i + 1] : cache.output;
    run_layer(params, i, cache.inputs[i], out, cache.cols[i], cache.argmax[i]);
  }
  return cache.output;
}

template <typename T>
Tensor<T> predict(const Parameters<T>& params, const Tensor<T>& batch) {
  check_batch(params, batch);
  return forward_from(params, batch, 0);
}

template <typename T>
Tensor<T> forward_from(const Parameters<T>& params, const Tensor<T>& activation, std::size_t first_layer) {
  Tensor<T> cur = activation;
  Tensor<T> next, cols;
  std::vector<std::uint32_t> argmax;
  for (std::size_t i = first_layer; i < params.config.layers.size(); ++i) {
    run_layer(params, i, cur, next, cols, argmax);
    std::swap(cur, next);
  }
  return cur;
}

template <typename T>
void backward(const Parameters<T>& params, const ForwardCache<T>& cache, const Tensor<T>& output_grad,
              Gradients<T>& grads, bool want_input_grad) {
  const std::size_t n = params.config.layers.size();
  if (cache.inputs.size() != n || cache.output.shape() != output_grad.shape()) {
    throw InvalidInput("backward: output gradient " + shape_string(output_grad.shape()) +
                       " does not match cached output " + shape_string(cache.output.shape()));
  }
  grads.layers.resize(n);
  Tensor<T> cur = output_grad;
  Tensor<T> next;
  for (std::size_t idx = n; idx-- > 0;) {
    const bool need_input = idx > 0 || want_input_grad;
    const Tensor<T>& in = cache.inputs[idx];
    const Tensor<T>& out = idx + 1 < n ? cache.inputs[idx + 1] : cache.output;
    auto& g = grads.layers[idx];
    std::visit(overloaded{
                   [&](const ConvSpec& c) {
                     layers::conv2d_backward(cache.cols[idx], in.shape(), params.layers[idx].weight, c, cur, g.weight,
                                             g.bias, need_input ? &next : nullptr);
                   },
                   [&](const ReluSpec&) { layers::relu_backward(out, cur, next); },
                   [&](const MaxPoolSpec&) { layers::maxpool_backward(cur, cache.argmax[idx], in.shape(), next); },
                   [&](const FlattenSpec&) {
                     next = cur;
                     next.reshape(in.shape());
                   },
                   [&](const FullyConnectedSpec&) {
                     layers::fc_backward(in, params.layers[idx].weight, cur, g.weight, g.bias,
                                         need_input ? &next : nullptr);
                   },
               },
               params.config.layers[idx]);
    if (!need_input) break;
    std::swap(cur, next);
  }
  if (want_input_grad) {
    grads.input = std::move(cur);
  } else {
    grads.input = Tensor<T>();
  }
}

template struct Parameters<float>;
template struct Parameters<double>;
template Parameters<float> init_parameters<float>(const NetworkConfig&, std::uint64_t);
template Parameters<double> init_parameters<double>(const NetworkConfig&, std::uint64_t);
template const Tensor<float>& forward(const Parameters<float>&, const Tensor<float>&, ForwardCache<float>&);
template const Tensor<double>& forward(const Parameters<double>&, const Tensor<double>&, ForwardCache<double>&);
template Tensor<float> predict(const Parameters<float>&, const Tensor<float>&);
template Tensor<double> predict(const Parameters<double>&, const Tensor<double>&);
template Tensor<float> forward_from(const Parameters<float>&, const Tensor<float>&, std::size_t);
template Tensor<double> forward_from(const Parameters<double>&, const Tensor<double>&, std::size_t);
template void backward(const Parameters<float>&, const ForwardCache<float>&, const Tensor<float>&,
                       Gradients<float>&, bool);
template void backward(const Parameters<double>&, const ForwardCache<double>&, const Tensor<double>&,
                       Gradients<double>&, bool);

}  // namespace posereg
