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

#include "posereg/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "posereg/error.hpp"

namespace posereg {

namespace {

double distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

std::string fixed(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": " + std::to_string(a) + " predictions vs " + std::to_string(b) +
                       " ground truths");
  }
}

}  // namespace

JointGroup group_of(JointId j) noexcept {
  switch (j) {
    case JointId::kHead:
      return JointGroup::kHead;
    case JointId::kRightWrist:
    case JointId::kLeftWrist:
      return JointGroup::kWrist;
    case JointId::kRightElbow:
    case JointId::kLeftElbow:
      return JointGroup::kElbow;
    case JointId::kRightShoulder:
    case JointId::kLeftShoulder:
      return JointGroup::kShoulder;
    case JointId::kRightHip:
    case JointId::kLeftHip:
      return JointGroup::kHip;
    case JointId::kRightKnee:
    case JointId::kLeftKnee:
      return JointGroup::kKnee;
    case JointId::kRightAnkle:
    case JointId::kLeftAnkle:
      return JointGroup::kAnkle;
  }
  return JointGroup::kHead;
}

std::string_view group_name(JointGroup g) noexcept {
  constexpr std::array<std::string_view, kNumGroups> names = {"head", "wrist", "elbow", "shoulder",
                                                              "hip",  "knee",  "ankle"};
  return names[static_cast<std::size_t>(g)];
}

TorsoLength torso_length(const Skeleton& gt) {
  const auto& rs = gt[JointId::kRightShoulder];
  const auto& lh = gt[JointId::kLeftHip];
  if (!rs || !lh) return {TorsoStatus::kMissingJoint, 0.0};
  const double d = distance(*rs, *lh);
  if (!(d > 0.0)) return {TorsoStatus::kDegenerate, 0.0};
  return {TorsoStatus::kOk, d};
}

PckReport pck(std::span<const Skeleton> preds, std::span<const Skeleton> gts, double alpha) {
  require_aligned(preds.size(), gts.size(), "pck");
  if (!(alpha >= 0.0)) throw InvalidInput("pck: alpha must be >= 0");
  PckReport r;
  r.alpha = alpha;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    const TorsoLength torso = torso_length(gts[s]);
    if (torso.status != TorsoStatus::kOk) {
      ++r.excluded;
      continue;
    }
    const double limit = alpha * torso.length;
    for (JointId j : kAllJoints) {
      const auto& g = gts[s][j];
      if (!g) continue;
      GroupScore& gs = r.groups[static_cast<std::size_t>(group_of(j))];
      ++gs.evaluated;
      const auto& p = preds[s][j];
      if (p && distance(*p, *g) <= limit) ++gs.correct;
    }
  }
  for (const auto& g : r.groups) {
    r.correct += g.correct;
    r.evaluated += g.evaluated;
  }
  r.overall = r.evaluated ? 100.0 * static_cast<double>(r.correct) / r.evaluated : 0.0;
  return r;
}

PckCurve pck_curve(std::span<const Skeleton> preds, std::span<const Skeleton> gts, std::span<const double> alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw InvalidInput("pck_curve: alphas must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw InvalidInput("pck_curve: alphas must be strictly increasing");
  }
  PckCurve curve;
  for (double a : alphas) curve.points.emplace_back(a, pck(preds, gts, a).overall);
  return curve;
}

Skeleton MeanPose::skeleton() const {
  Skeleton sk;
  for (JointId j : kAllJoints) {
    const std::size_t i = index_of(j);
    if (predictable[2 * i] && predictable[2 * i + 1]) sk.set(j, {mean[2 * i], mean[2 * i + 1]});
  }
  return sk;
}

MeanPose mean_pose(std::span<const PoseVector> targets, std::span<const PoseVector> weights) {
  if (targets.empty()) throw InvalidInput("mean_pose: empty training set");
  if (targets.size() != weights.size()) throw InvalidInput("mean_pose: targets and weights differ in length");
  PoseVector sum{}, count{};
  for (std::size_t s = 0; s < targets.size(); ++s) {
    for (std::size_t k = 0; k < kPoseDim; ++k) {
      if (weights[s][k] != 0.0) {
        sum[k] += targets[s][k];
        count[k] += 1.0;
      }
    }
  }
  MeanPose m;
  for (std::size_t k = 0; k < kPoseDim; ++k) {
    m.predictable[k] = count[k] > 0;
    m.mean[k] = count[k] > 0 ? sum[k] / count[k] : 0.0;
  }
  return m;
}

MeanPose mean_pose(std::span<const Skeleton> normalized) {
  std::vector<PoseVector> targets, weights;
  for (const auto& sk : normalized) {
    targets.push_back(sk.to_vector());
    PoseVector w{};
    for (JointId j : kAllJoints) {
      if (sk.has(j)) w[2 * index_of(j)] = w[2 * index_of(j) + 1] = 1.0;
    }
    weights.push_back(w);
  }
  return mean_pose(targets, weights);
}

double pixel_error(std::span<const Skeleton> preds, std::span<const Skeleton> gts, double reference_side) {
  require_aligned(preds.size(), gts.size(), "pixel_error");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    for (JointId j : kAllJoints) {
      const auto& g = gts[s][j];
      const auto& p = preds[s][j];
      if (!g || !p) continue;
      total += distance(*p, *g) * reference_side;
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

std::string report_json(const PckReport& r) {
  nlohmann::json groups = nlohmann::json::object();
  for (JointGroup g : kAllGroups) {
    const GroupScore& s = r.group(g);
    groups[std::string(group_name(g))] = {{"correct", s.correct}, {"evaluated", s.evaluated}, {"pck", s.pck()}};
  }
  nlohmann::json j = {{"alpha", r.alpha},         {"groups", groups},     {"correct", r.correct},
                      {"evaluated", r.evaluated}, {"overall", r.overall}, {"excluded_samples", r.excluded}};
  return j.dump(2);
}

std::string report_csv_header() { return "label,head,wrist,elbow,shoulder,hip,knee,ankle,all"; }

std::string report_csv_row(const PckReport& r, std::string_view label) {
  std::string row(label);
  for (JointGroup g : kAllGroups) row += "," + fixed(r.group(g).pck());
  row += "," + fixed(r.overall);
  return row;
}

std::string curve_csv(const PckCurve& c) {
  std::string out = "alpha,pck\n";
  for (const auto& [a, v] : c.points) out += fixed(a, 4) + "," + fixed(v, 3) + "\n";
  return out;
}

}  // namespace posereg
