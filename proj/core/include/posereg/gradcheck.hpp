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

#ifndef POSEREG_GRADCHECK_HPP_
#define POSEREG_GRADCHECK_HPP_

#include <cstdint>
#include <string>

#include "posereg/network.hpp"

namespace posereg {

struct GradcheckOptions {
  std::size_t batch = 2;
  double epsilon = 1e-5;
  std::uint64_t seed = 1;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  /// Central differences of a loss near 0.1 carry about 1e-12 of rounding
  /// at epsilon = 1e-5, so gradients far below the floor are compared
  /// against that noise rather than against themselves.
  double floor = 1e-7;
  /// Errors above this trigger the kink re-check below.
  double tolerance = 1e-4;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Parameters whose +-epsilon probes changed a ReLU sign or a max-pool
  /// winner. Those are re-measured with epsilon shrunk by 10x steps until
  /// both probes keep the unperturbed activation pattern.
  std::size_t kinks = 0;
  std::string worst;  // "layer 3 weight[17]: analytic .. numeric .."
  double seconds = 0.0;
};

/// Compares the backpropagated gradient of the batch-mean weighted L2 loss
/// with central differences for every parameter, in double precision, on
/// random parameters, a random input batch, random targets and a random
/// joint mask. Non-differentiable crossings are handled as described for
/// GradcheckResult::kinks.
GradcheckResult gradcheck(const NetworkConfig& config, const GradcheckOptions& options = {});

}  // namespace posereg

#endif  // POSEREG_GRADCHECK_HPP_
