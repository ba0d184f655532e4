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

#ifndef POSEREG_CHECKPOINT_HPP_
#define POSEREG_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "posereg/network.hpp"

namespace posereg {

/// Persisted network snapshot.
///
/// Byte layout, all integers little-endian:
///
///   offset  size  field
///   0       8     magic "POSECKPT"
///   8       4     u32 format version (kCheckpointVersion)
///   12      8     u64 training iteration
///   20      8     u64 seed
///   28      4     u32 config text length L
///   32      L     canonical NetworkConfig text (UTF-8)
///   ..      4     u32 tensor count T
///   then T records:
///           4     u32 layer index
///           1     u8 role (0 = weight, 1 = bias)
///           4     u32 rank R
///           4R    u32 dims
///           4N    f32 values (IEEE-754 binary32), N = product of dims
///   ..      4     end marker "END!"
///
/// Tensors appear in layer order, weight before bias; layers without
/// parameters contribute no records.
struct Checkpoint {
  Parameters<float> params;
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
/// Throws CorruptCheckpoint (bad magic, truncation, trailing bytes, shape
/// disagreement) or UnsupportedVersion.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace posereg

#endif  // POSEREG_CHECKPOINT_HPP_
