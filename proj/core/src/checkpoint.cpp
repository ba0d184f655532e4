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

#include "posereg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "posereg/error.hpp"

namespace posereg {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'S', 'E', 'C', 'K', 'P', 'T'};
constexpr char kEnd[4] = {'E', 'N', 'D', '!'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw CorruptCheckpoint(std::string("checkpoint truncated while reading ") + what + " at byte " +
                              std::to_string(pos_));
    }
  }
  std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return bytes(1, what)[0]; }
  std::uint32_t u32(const char* what) {
    auto b = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto b = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  c.params.check_shapes();
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u64(c.iteration);
  w.u64(c.seed);
  const std::string text = c.params.config.canonical_text();
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());

  std::uint32_t count = 0;
  for (const auto& l : c.params.layers) count += l.weight.empty() ? 0 : 2;
  w.u32(count);
  for (std::size_t i = 0; i < c.params.layers.size(); ++i) {
    const auto& l = c.params.layers[i];
    if (l.weight.empty()) continue;
    for (std::uint8_t role : {std::uint8_t{0}, std::uint8_t{1}}) {
      const Tensor<float>& t = role == 0 ? l.weight : l.bias;
      w.u32(static_cast<std::uint32_t>(i));
      w.u8(role);
      w.u32(static_cast<std::uint32_t>(t.rank()));
      for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
      for (float v : t) w.f32(v);
    }
  }
  w.bytes(kEnd, sizeof(kEnd));
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptCheckpoint("not a posereg checkpoint (bad magic)");
  }
  r.bytes(sizeof(kMagic), "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) throw UnsupportedVersion(version, kCheckpointVersion);

  Checkpoint c;
  c.iteration = r.u64("iteration");
  c.seed = r.u64("seed");
  const std::uint32_t text_len = r.u32("config length");
  const auto text = r.bytes(text_len, "config text");
  try {
    c.params.config = NetworkConfig::parse(std::string(text.begin(), text.end()));
  } catch (const DataError& e) {
    throw CorruptCheckpoint(std::string("checkpoint config unreadable: ") + e.what());
  }

  const auto expected = parameter_shapes(c.params.config);
  c.params.layers.assign(expected.size(), {});
  std::size_t with_params = 0;
  for (const auto& e : expected) with_params += e.first.empty() ? 0 : 1;

  const std::uint32_t count = r.u32("tensor count");
  if (count != 2 * with_params) {
    throw CorruptCheckpoint("checkpoint holds " + std::to_string(count) + " tensors, config needs " +
                            std::to_string(2 * with_params));
  }
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t layer = r.u32("tensor layer");
    const std::uint8_t role = r.u8("tensor role");
    const std::uint32_t rank = r.u32("tensor rank");
    if (layer >= expected.size() || role > 1 || rank > 8) {
      throw CorruptCheckpoint("checkpoint tensor record " + std::to_string(t) + " is malformed");
    }
    Shape shape(rank);
    for (auto& d : shape) d = r.u32("tensor dims");
    const Shape& want = role == 0 ? expected[layer].first : expected[layer].second;
    if (shape != want) {
      throw CorruptCheckpoint("checkpoint tensor for layer " + std::to_string(layer) + " has shape " +
                              shape_string(shape) + ", config requires " + shape_string(want));
    }
    const std::size_t n = shape_volume(shape);
    r.need(4 * n, "tensor values");
    std::vector<float> values(n);
    for (auto& v : values) v = std::bit_cast<float>(r.u32("tensor values"));
    Tensor<float>& slot = role == 0 ? c.params.layers[layer].weight : c.params.layers[layer].bias;
    if (!slot.empty()) throw CorruptCheckpoint("checkpoint repeats a tensor for layer " + std::to_string(layer));
    slot = Tensor<float>(shape, std::move(values));
  }
  const auto end = r.bytes(sizeof(kEnd), "end marker");
  if (std::memcmp(end.data(), kEnd, sizeof(kEnd)) != 0) throw CorruptCheckpoint("checkpoint end marker missing");
  if (r.remaining() != 0) throw CorruptCheckpoint("checkpoint has trailing bytes");
  try {
    c.params.check_shapes();
  } catch (const InvalidInput& e) {
    throw CorruptCheckpoint(e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const UnsupportedVersion&) {
    throw;
  } catch (const CorruptCheckpoint& e) {
    throw CorruptCheckpoint(path.string() + ": " + e.what());
  }
}

}  // namespace posereg
