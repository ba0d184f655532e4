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

#ifndef POSEREG_SKELETON_HPP_
#define POSEREG_SKELETON_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "posereg/geometry.hpp"

namespace posereg {

/// The 13 regressed joints. The enumerator order is the layout of every
/// 26-element pose vector: (x_0, y_0, x_1, y_1, ...).
enum class JointId : int {
  kHead = 0,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
};

inline constexpr std::size_t kNumJoints = 13;
inline constexpr std::size_t kPoseDim = 2 * kNumJoints;

inline constexpr std::array<JointId, kNumJoints> kAllJoints = {
    JointId::kHead,       JointId::kRightShoulder, JointId::kRightElbow, JointId::kRightWrist,
    JointId::kLeftShoulder, JointId::kLeftElbow,   JointId::kLeftWrist,  JointId::kRightHip,
    JointId::kRightKnee,  JointId::kRightAnkle,    JointId::kLeftHip,    JointId::kLeftKnee,
    JointId::kLeftAnkle};

constexpr std::size_t index_of(JointId j) noexcept { return static_cast<std::size_t>(j); }

/// Name used in JSONL files ("head", "r_shoulder", "l_wrist", ...).
std::string_view joint_name(JointId j) noexcept;
/// Inverse of joint_name; nullopt for unknown names.
std::optional<JointId> joint_from_name(std::string_view name) noexcept;
/// Left/right counterpart; the head maps to itself.
JointId mirror_joint(JointId j) noexcept;

using PoseVector = std::array<double, kPoseDim>;

/// Per-joint optional coordinates. An absent joint carries no coordinate.
class Skeleton {
 public:
  bool has(JointId j) const noexcept { return joints_[index_of(j)].has_value(); }
  const std::optional<Point2>& operator[](JointId j) const noexcept { return joints_[index_of(j)]; }
  void set(JointId j, Point2 p) noexcept { joints_[index_of(j)] = p; }
  void clear(JointId j) noexcept { joints_[index_of(j)].reset(); }

  std::size_t present_count() const noexcept;
  bool empty() const noexcept { return present_count() == 0; }

  /// Every joint present, read from a 26-vector.
  static Skeleton from_vector(const PoseVector& v);
  /// Coordinates in canonical slots; absent joints are written as 0.
  PoseVector to_vector() const;

  friend bool operator==(const Skeleton&, const Skeleton&) = default;

 private:
  std::array<std::optional<Point2>, kNumJoints> joints_{};
};

/// Tightest box around the present joints. Throws InvalidInput if none are.
BBox tight_box(const Skeleton& sk);

/// Mirrors x about the extent (x -> extent - x) and swaps left/right labels.
/// Use the image width for frame coordinates and 1 for normalized ones.
Skeleton hflip_skeleton(const Skeleton& sk, double extent);

/// The same mirror on a normalized 26-vector (x -> 1 - x, slots swapped).
/// Applying it to a flipped crop's prediction un-flips it.
PoseVector hflip_pose(const PoseVector& v);
/// Slot permutation only, for 26-element weight masks.
PoseVector swap_pose_slots(const PoseVector& v);

}  // namespace posereg

#endif  // POSEREG_SKELETON_HPP_
