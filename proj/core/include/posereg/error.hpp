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

#ifndef POSEREG_ERROR_HPP_
#define POSEREG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace posereg {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed an argument that violates an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data/config files (annotations, detections,
/// images, network configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint bytes could not be decoded.
class CorruptCheckpoint : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  UnsupportedVersion(unsigned found, unsigned supported)
      : Error("unsupported checkpoint format version " + std::to_string(found) +
              " (this build reads version " + std::to_string(supported) + ")"),
        found_(found),
        supported_(supported) {}

  unsigned found() const noexcept { return found_; }
  unsigned supported() const noexcept { return supported_; }

 private:
  unsigned found_;
  unsigned supported_;
};

/// Training produced a NaN/Inf loss.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

}  // namespace posereg

#endif  // POSEREG_ERROR_HPP_
