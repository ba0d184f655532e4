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

#ifndef POSEREG_EVALUATION_HPP_
#define POSEREG_EVALUATION_HPP_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "posereg/skeleton.hpp"

namespace posereg {

/// Report columns; left and right joints pool into one group.
enum class JointGroup { kHead, kWrist, kElbow, kShoulder, kHip, kKnee, kAnkle };
inline constexpr std::size_t kNumGroups = 7;
inline constexpr std::array<JointGroup, kNumGroups> kAllGroups = {
    JointGroup::kHead, JointGroup::kWrist, JointGroup::kElbow, JointGroup::kShoulder,
    JointGroup::kHip,  JointGroup::kKnee,  JointGroup::kAnkle};

JointGroup group_of(JointId j) noexcept;
std::string_view group_name(JointGroup g) noexcept;

enum class TorsoStatus { kOk, kMissingJoint, kDegenerate };

struct TorsoLength {
  TorsoStatus status = TorsoStatus::kMissingJoint;
  double length = 0.0;
};

/// Right shoulder to left hip distance. Samples lacking either joint are
/// reported as kMissingJoint, coincident joints as kDegenerate.
TorsoLength torso_length(const Skeleton& gt);

struct GroupScore {
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  double pck() const noexcept { return evaluated ? 100.0 * static_cast<double>(correct) / evaluated : 0.0; }
};

struct PckReport {
  double alpha = 0.2;
  std::array<GroupScore, kNumGroups> groups{};
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  double overall = 0.0;       // 100 * correct / evaluated
  std::size_t excluded = 0;   // samples without a usable torso length

  const GroupScore& group(JointGroup g) const { return groups[static_cast<std::size_t>(g)]; }
};

/// A joint annotated in the ground truth is correct when its predicted
/// position lies within alpha * torso length (inclusive). A joint missing
/// from the prediction counts as wrong. Throws InvalidInput when the lists
/// differ in length or alpha is negative.
PckReport pck(std::span<const Skeleton> preds, std::span<const Skeleton> gts, double alpha = 0.2);

struct PckCurve {
  std::vector<std::pair<double, double>> points;  // (alpha, overall PCK)
};

/// Alphas must be strictly increasing and positive.
PckCurve pck_curve(std::span<const Skeleton> preds, std::span<const Skeleton> gts, std::span<const double> alphas);

/// Constant predictor: per-coordinate mean over the samples annotating it.
struct MeanPose {
  PoseVector mean{};
  std::array<bool, kPoseDim> predictable{};

  /// Joints nobody annotated are left absent.
  Skeleton skeleton() const;
};

/// Throws InvalidInput on an empty set or mismatched lengths.
MeanPose mean_pose(std::span<const PoseVector> targets, std::span<const PoseVector> weights);
MeanPose mean_pose(std::span<const Skeleton> normalized);

/// Mean Euclidean error over annotated ground-truth joints, with normalized
/// coordinates scaled by reference_side. Returns 0 when nothing is annotated.
double pixel_error(std::span<const Skeleton> preds, std::span<const Skeleton> gts, double reference_side = 224.0);

std::string report_json(const PckReport& r);
/// "label,head,wrist,elbow,shoulder,hip,knee,ankle,all"
std::string report_csv_header();
std::string report_csv_row(const PckReport& r, std::string_view label);
/// "alpha,pck" rows.
std::string curve_csv(const PckCurve& c);

}  // namespace posereg

#endif  // POSEREG_EVALUATION_HPP_
