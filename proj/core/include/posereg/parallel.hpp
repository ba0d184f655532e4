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

#ifndef POSEREG_PARALLEL_HPP_
#define POSEREG_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <functional>

namespace posereg {

/// Worker count used by parallel_for. 1 (the default) runs everything on
/// the calling thread; 0 selects std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count() noexcept;

/// Calls fn(i) for i in [0, n). Work is split into contiguous chunks, one
/// per worker; callers write results into slot i so ordering never depends
/// on scheduling. The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace posereg

#endif  // POSEREG_PARALLEL_HPP_
