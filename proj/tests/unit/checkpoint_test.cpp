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

#include <fstream>

#include "posereg/checkpoint.hpp"
#include "posereg/error.hpp"
#include "test_support.hpp"

using namespace posereg;

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is bit exact") {
    testing::TempDir dir("ckpt");
    for (const char* preset : {"desk-64", "paper-224"}) {
      Checkpoint c{init_parameters<float>(NetworkConfig::preset(preset), 5), 1234, 77};
      save_checkpoint(c, dir / "c.bin");
      const Checkpoint back = load_checkpoint(dir / "c.bin");
      CHECK(back.params == c.params);
      CHECK(back.iteration == 1234);
      CHECK(back.seed == 77);
      CHECK(encode_checkpoint(back) == encode_checkpoint(c));
    }
  }

  TEST_CASE("damaged files") {
    const Checkpoint c{init_parameters<float>(NetworkConfig::preset("desk-64"), 1), 3, 4};
    const auto bytes = encode_checkpoint(c);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_checkpoint(truncated), CorruptCheckpoint);
    CHECK_THROWS_AS(decode_checkpoint(std::vector<std::uint8_t>{}), CorruptCheckpoint);

    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(magic), CorruptCheckpoint);

    // version field follows the 8-byte magic
    auto bumped = bytes;
    bumped[8] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
    try {
      (void)decode_checkpoint(bumped);
      FAIL("expected UnsupportedVersion");
    } catch (const UnsupportedVersion& e) {
      const std::string msg = e.what();
      CHECK(msg.find(std::to_string(kCheckpointVersion + 1)) != std::string::npos);
      CHECK(msg.find(std::to_string(kCheckpointVersion)) != std::string::npos);
    }
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin"), Error);
  }
}
