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

#include <doctest.h>

#include <cmath>

#include "posereg/error.hpp"
#include "posereg/gradcheck.hpp"
#include "posereg/network.hpp"
#include "test_support.hpp"

using namespace posereg;
using doctest::Approx;

namespace {

Tensor<float> random_batch(const NetworkConfig& net, std::size_t n, Rng& rng) {
  Shape s = net.input_shape();
  s.insert(s.begin(), n);
  Tensor<float> t(s);
  for (float& v : t) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

NetworkConfig tiny(std::string_view body, int side = 6, int channels = 2) {
  return NetworkConfig::parse("input side=" + std::to_string(side) + " channels=" + std::to_string(channels) + "\n" +
                              std::string(body) + "\nfc out=26\n");
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("presets") {
    const auto desk = NetworkConfig::preset("desk-64");
    int convs = 0, fcs = 0;
    for (const auto& l : desk.layers) {
      convs += std::holds_alternative<ConvSpec>(l);
      fcs += std::holds_alternative<FullyConnectedSpec>(l);
    }
    CHECK(convs == 3);
    CHECK(fcs == 2);
    CHECK(init_parameters<float>(desk, 0).count() <= 1'000'000);

    const auto large = NetworkConfig::preset("paper-224");
    CHECK(large.input_side == 224);
    const std::size_t n = init_parameters<float>(large, 0).count();
    CHECK(n == init_parameters<float>(large, 1).count());
    CHECK(n > 1'000'000);
    CHECK_THROWS_AS(NetworkConfig::preset("huge"), InvalidInput);
    CHECK(NetworkConfig::parse(desk.canonical_text()) == desk);
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(NetworkConfig::parse("input side=8 channels=3\nconv out=4 k=3\nfc out=10\n"), DataError);
    CHECK_THROWS_AS(NetworkConfig::parse("input side=8 channels=3\nwobble\nfc out=26\n"), DataError);
    CHECK_THROWS_AS(NetworkConfig::parse("input side=4 channels=3\nconv out=4 k=9\nflatten\nfc out=26\n").validate(),
                    Error);
  }

  TEST_CASE("xavier initialization") {
    const auto net = NetworkConfig::parse("input side=1 channels=4\nflatten\nfc out=26\n");
    const auto p = init_parameters<double>(net, 3);
    const double bound = std::sqrt(6.0 / (4 + 26));
    for (double w : p.layers[1].weight) REQUIRE(std::abs(w) <= bound);
    for (double b : p.layers[1].bias) REQUIRE(b == 0.0);

    // fan_in = fan_out = 4 through a hidden layer.
    const auto sq = NetworkConfig::parse("input side=1 channels=4\nflatten\nfc out=4\nfc out=26\n");
    double sum = 0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 700; ++seed) {
      const auto p4 = init_parameters<double>(sq, seed);
      for (double w : p4.layers[1].weight) {
        REQUIRE(std::abs(w) <= 0.8660254037844386);
        sum += w;
        ++count;
      }
    }
    CHECK(count >= 10000);
    CHECK(std::abs(sum / count) < 0.02);

    const auto desk = NetworkConfig::preset("desk-64");
    CHECK(init_parameters<float>(desk, 9) == init_parameters<float>(desk, 9));
    CHECK_FALSE(init_parameters<float>(desk, 9) == init_parameters<float>(desk, 10));
    const auto p9 = init_parameters<float>(desk, 9);
    for (const auto& l : p9.layers) {
      for (float b : l.bias) REQUIRE(b == 0.0f);
    }
  }

  TEST_CASE("output shapes follow the window formula") {
    Rng rng(21);
    int built = 0;
    while (built < 50) {
      const int side = 4 + int(rng.index(40));
      const int k = 1 + int(rng.index(5)), s = 1 + int(rng.index(3)), pad = int(rng.index(3));
      const int pk = 1 + int(rng.index(3)), ps = 1 + int(rng.index(3));
      const int conv_side = (side + 2 * pad - k) / s + 1;
      if (side + 2 * pad < k || conv_side < pk) continue;
      const int pool_side = (conv_side - pk) / ps + 1;
      const auto net = NetworkConfig::parse("input side=" + std::to_string(side) + " channels=3\nconv out=5 k=" +
                                            std::to_string(k) + " s=" + std::to_string(s) + " p=" +
                                            std::to_string(pad) + "\nrelu\nmaxpool k=" + std::to_string(pk) +
                                            " s=" + std::to_string(ps) + "\nflatten\nfc out=26\n");
      const auto shapes = net.layer_output_shapes();
      REQUIRE(shapes[0] == Shape{std::size_t(conv_side), std::size_t(conv_side), 5});
      REQUIRE(shapes[2] == Shape{std::size_t(pool_side), std::size_t(pool_side), 5});
      REQUIRE(shapes[3] == Shape{std::size_t(pool_side * pool_side * 5)});

      const auto p = init_parameters<float>(net, 1);
      const auto out = predict(p, random_batch(net, 3, rng));
      REQUIRE(out.shape() == Shape{3, 26});
      ++built;
    }
  }

  TEST_CASE("zero weights output the final bias") {
    const auto net = NetworkConfig::preset("desk-64");
    auto p = init_parameters<float>(net, 1);
    for (auto& l : p.layers) l.weight.fill(0.0f);
    Rng rng(22);
    for (float& b : p.layers.back().bias) b = static_cast<float>(rng.uniform(-1, 1));
    const auto out = predict(p, random_batch(net, 4, rng));
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < kPoseDim; ++i) REQUIRE(out.data()[s * kPoseDim + i] == p.layers.back().bias.data()[i]);
    }
  }

  TEST_CASE("batch consistency") {
    const auto net = NetworkConfig::preset("desk-64");
    const auto p = init_parameters<float>(net, 2);
    Rng rng(23);
    const auto batch = random_batch(net, 5, rng);
    const auto all = predict(p, batch);
    const std::size_t per = batch.size() / 5;
    for (std::size_t s = 0; s < 5; ++s) {
      Shape one = net.input_shape();
      one.insert(one.begin(), 1);
      Tensor<float> single(one, std::vector<float>(batch.data() + s * per, batch.data() + (s + 1) * per));
      const auto out = predict(p, single);
      for (std::size_t i = 0; i < kPoseDim; ++i) {
        const float a = out.data()[i], b = all.data()[s * kPoseDim + i];
        REQUIRE(std::abs(a - b) <= 1e-5f * std::max(1.0f, std::abs(a)));
      }
    }
    CHECK_THROWS_AS(predict(p, Tensor<float>(Shape{1, 32, 32, 3})), InvalidInput);
  }

  TEST_CASE("backward is linear in the output gradient") {
    const auto net = tiny("conv out=3 k=3 s=1 p=1\nrelu\nmaxpool k=2 s=2\nflatten\nfc out=8\nrelu");
    const auto p = init_parameters<double>(net, 4);
    Rng rng(24);
    Shape s = net.input_shape();
    s.insert(s.begin(), 2);
    Tensor<double> x(s);
    for (double& v : x) v = rng.uniform(-1, 1);
    ForwardCache<double> cache;
    forward(p, x, cache);
    Tensor<double> g(Shape{2, kPoseDim});
    for (double& v : g) v = rng.uniform(-1, 1);
    Tensor<double> g3 = g;
    for (double& v : g3) v *= 3;
    const auto a = backward(p, cache, g);
    const auto b = backward(p, cache, g3);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      for (std::size_t i = 0; i < a.layers[l].weight.size(); ++i) {
        REQUIRE(b.layers[l].weight.data()[i] == Approx(3 * a.layers[l].weight.data()[i]).epsilon(1e-12));
      }
    }
    const auto z = backward(p, cache, Tensor<double>(Shape{2, kPoseDim}));
    for (const auto& l : z.layers) {
      for (double v : l.weight) REQUIRE(v == 0.0);
      for (double v : l.bias) REQUIRE(v == 0.0);
    }
    for (double v : z.input) REQUIRE(v == 0.0);
  }

  TEST_CASE("relu and maxpool route gradients") {
    // 3x3 single channel, pool k=2 s=1 -> 2x2 windows.
    Tensor<double> in(Shape{1, 3, 3, 1}, {1, 5, 2, 7, 3, 0, 4, 8, 6});
    std::vector<std::uint32_t> argmax;
    Tensor<double> out;
    layers::maxpool_forward(in, MaxPoolSpec{2, 1}, argmax, out);
    CHECK(std::vector<double>(out.begin(), out.end()) == std::vector<double>{7, 5, 8, 8});
    Tensor<double> dout(Shape{1, 2, 2, 1}, {1, 10, 100, 1000});
    Tensor<double> din;
    layers::maxpool_backward(dout, argmax, in.shape(), din);
    CHECK(std::vector<double>(din.begin(), din.end()) == std::vector<double>{0, 10, 0, 1, 0, 0, 0, 1100, 0});

    Tensor<double> r_in(Shape{1, 3, 3, 1}, {-1, 2, 0, 3, -4, 5, 0, -0.5, 1});
    Tensor<double> r_out, r_din;
    layers::relu_forward(r_in, r_out);
    Tensor<double> ones(Shape{1, 3, 3, 1}, 1.0);
    layers::relu_backward(r_out, ones, r_din);
    CHECK(std::vector<double>(r_din.begin(), r_din.end()) == std::vector<double>{0, 1, 0, 1, 0, 1, 0, 0, 1});
  }

  TEST_CASE("finite differences per layer type") {
    GradcheckOptions o;
    o.batch = 2;
    for (const char* body : {"flatten", "conv out=3 k=3 s=2 p=1\nflatten", "conv out=2 k=1 s=1 p=0\nrelu\nflatten",
                             "maxpool k=2 s=2\nflatten", "maxpool k=3 s=1\nflatten", "flatten\nfc out=7\nrelu"}) {
      CAPTURE(body);
      const auto r = gradcheck(tiny(body), o);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.checked > 0);
    }
  }
}
