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

#include "posereg/skeleton.hpp"

#include <algorithm>
#include <limits>

#include "posereg/error.hpp"

namespace posereg {

namespace {

constexpr std::array<std::string_view, kNumJoints> kNames = {
    "head",  "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee",     "r_ankle", "l_hip",   "l_knee",     "l_ankle"};

constexpr std::array<JointId, kNumJoints> kMirror = {
    JointId::kHead,         JointId::kLeftShoulder, JointId::kLeftElbow,  JointId::kLeftWrist,
    JointId::kRightShoulder, JointId::kRightElbow,  JointId::kRightWrist, JointId::kLeftHip,
    JointId::kLeftKnee,     JointId::kLeftAnkle,    JointId::kRightHip,   JointId::kRightKnee,
    JointId::kRightAnkle};

}  // namespace

std::string_view joint_name(JointId j) noexcept { return kNames[index_of(j)]; }

std::optional<JointId> joint_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (kNames[i] == name) return kAllJoints[i];
  }
  return std::nullopt;
}

JointId mirror_joint(JointId j) noexcept { return kMirror[index_of(j)]; }

std::size_t Skeleton::present_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(joints_.begin(), joints_.end(), [](const auto& p) { return p.has_value(); }));
}

Skeleton Skeleton::from_vector(const PoseVector& v) {
  Skeleton sk;
  for (JointId j : kAllJoints) {
    const std::size_t i = index_of(j);
    sk.set(j, {v[2 * i], v[2 * i + 1]});
  }
  return sk;
}

PoseVector Skeleton::to_vector() const {
  PoseVector v{};
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (joints_[i]) {
      v[2 * i] = joints_[i]->x;
      v[2 * i + 1] = joints_[i]->y;
    }
  }
  return v;
}

BBox tight_box(const Skeleton& sk) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BBox b{inf, inf, -inf, -inf};
  bool any = false;
  for (JointId j : kAllJoints) {
    if (const auto& p = sk[j]) {
      any = true;
      b.x_min = std::min(b.x_min, p->x);
      b.y_min = std::min(b.y_min, p->y);
      b.x_max = std::max(b.x_max, p->x);
      b.y_max = std::max(b.y_max, p->y);
    }
  }
  if (!any) {
    throw InvalidInput("tight_box: skeleton has no present joints");
  }
  return b;
}

Skeleton hflip_skeleton(const Skeleton& sk, double extent) {
  Skeleton out;
  for (JointId j : kAllJoints) {
    if (const auto& p = sk[j]) {
      out.set(mirror_joint(j), {extent - p->x, p->y});
    }
  }
  return out;
}

PoseVector hflip_pose(const PoseVector& v) {
  PoseVector out{};
  for (JointId j : kAllJoints) {
    const std::size_t src = index_of(j);
    const std::size_t dst = index_of(mirror_joint(j));
    out[2 * dst] = 1.0 - v[2 * src];
    out[2 * dst + 1] = v[2 * src + 1];
  }
  return out;
}

PoseVector swap_pose_slots(const PoseVector& v) {
  PoseVector out{};
  for (JointId j : kAllJoints) {
    const std::size_t src = index_of(j);
    const std::size_t dst = index_of(mirror_joint(j));
    out[2 * dst] = v[2 * src];
    out[2 * dst + 1] = v[2 * src + 1];
  }
  return out;
}

}  // namespace posereg
