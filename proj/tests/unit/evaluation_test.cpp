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

#include "oracles.hpp"
#include "posereg/error.hpp"
#include "posereg/evaluation.hpp"
#include "test_support.hpp"

using namespace posereg;
using doctest::Approx;

namespace {

Skeleton displaced(const Skeleton& s, Rng& rng, double scale) {
  Skeleton out;
  for (JointId j : kAllJoints) {
    if (s[j] && rng.bernoulli(0.95)) out.set(j, {s[j]->x + rng.normal() * scale, s[j]->y + rng.normal() * scale});
  }
  return out;
}

Skeleton torso10() {
  Skeleton s;
  s.set(JointId::kRightShoulder, {0, 0});
  s.set(JointId::kLeftHip, {6, 8});
  s.set(JointId::kHead, {3, -5});
  return s;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("torso length") {
    CHECK(torso_length(torso10()).status == TorsoStatus::kOk);
    CHECK(torso_length(torso10()).length == 10.0);
    Skeleton missing = torso10();
    missing.clear(JointId::kLeftHip);
    CHECK(torso_length(missing).status == TorsoStatus::kMissingJoint);
    Skeleton flat;
    flat.set(JointId::kRightShoulder, {1, 1});
    flat.set(JointId::kLeftHip, {1, 1});
    CHECK(torso_length(flat).status == TorsoStatus::kDegenerate);
  }

  TEST_CASE("pck examples") {
    const std::vector<Skeleton> gts{torso10()};
    CHECK(pck(gts, gts).overall == 100.0);

    Skeleton far = torso10();
    for (JointId j : kAllJoints)
      if (far[j]) far.set(j, {far[j]->x + 100, far[j]->y});
    CHECK(pck(std::vector<Skeleton>{far}, gts).overall == 0.0);

    Skeleton edge = torso10();
    edge.set(JointId::kHead, {3, -3});  // exactly 2.0 from the truth
    const auto r = pck(std::vector<Skeleton>{edge}, gts, 0.2);
    CHECK(r.group(JointGroup::kHead).correct == 1);
    Skeleton beyond = torso10();
    beyond.set(JointId::kHead, {3, -2.999});
    CHECK(pck(std::vector<Skeleton>{beyond}, gts, 0.2).group(JointGroup::kHead).correct == 0);

    Skeleton no_head = torso10();
    no_head.clear(JointId::kHead);
    const auto m = pck(std::vector<Skeleton>{no_head}, gts);
    CHECK(m.evaluated == 3);
    CHECK(m.correct == 2);

    Skeleton excluded;
    excluded.set(JointId::kHead, {1, 1});
    const auto e = pck(std::vector<Skeleton>{excluded, torso10()}, std::vector<Skeleton>{excluded, torso10()});
    CHECK(e.excluded == 1);
    CHECK(e.evaluated == 3);

    CHECK_THROWS_AS(pck(std::vector<Skeleton>{}, gts), InvalidInput);
  }

  TEST_CASE("pck matches the brute force oracle") {
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Skeleton> gts, preds;
      for (int s = 0; s < 100; ++s) {
        gts.push_back(testing::random_skeleton(rng, 100, 0.85));
        preds.push_back(displaced(gts.back(), rng, rng.uniform(1, 15)));
      }
      for (double alpha : {0.05, 0.1, 0.2, 0.5}) {
        const auto got = pck(preds, gts, alpha);
        const auto want = oracle::pck(preds, gts, alpha);
        REQUIRE(got.excluded == std::size_t(want.excluded));
        REQUIRE(got.correct == std::size_t(want.total_correct));
        REQUIRE(got.evaluated == std::size_t(want.total_evaluated));
        for (std::size_t g = 0; g < kNumGroups; ++g) {
          REQUIRE(got.groups[g].correct == std::size_t(want.correct[g]));
          REQUIRE(got.groups[g].evaluated == std::size_t(want.evaluated[g]));
        }
      }
    }
  }

  TEST_CASE("pck curve") {
    Rng rng(52);
    std::vector<Skeleton> gts, preds;
    for (int s = 0; s < 60; ++s) {
      gts.push_back(testing::random_skeleton(rng));
      preds.push_back(displaced(gts.back(), rng, 8));
    }
    const std::vector<double> alphas{0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0};
    const auto curve = pck_curve(preds, gts, alphas);
    REQUIRE(curve.points.size() == alphas.size());
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].second >= curve.points[i - 1].second);
    }
    const std::vector<double> unsorted{0.2, 0.1};
    CHECK_THROWS_AS(pck_curve(preds, gts, unsorted), InvalidInput);
    const std::vector<double> zero{0.0, 0.1};
    CHECK_THROWS_AS(pck_curve(preds, gts, zero), InvalidInput);
  }

  TEST_CASE("mean pose") {
    std::vector<PoseVector> t(3), w(3);
    for (int s = 0; s < 3; ++s) {
      t[s].fill(0.1 * (s + 1));
      w[s].fill(1.0);
    }
    w[2][0] = 0.0;
    t[2][0] = 99;
    const auto m = mean_pose(t, w);
    CHECK(m.mean[0] == Approx(0.15));
    CHECK(m.mean[1] == Approx(0.2));
    CHECK(m.predictable[0]);
    for (auto& v : w) v[4] = v[5] = 0.0;
    const auto gap = mean_pose(t, w);
    CHECK_FALSE(gap.predictable[4]);
    CHECK_FALSE(gap.skeleton().has(static_cast<JointId>(2)));
  }

  TEST_CASE("pixel error") {
    Skeleton a, b;
    a.set(JointId::kHead, {0.1, 0.1});
    b.set(JointId::kHead, {0.1, 0.2});
    b.set(JointId::kLeftKnee, {0.5, 0.5});
    CHECK(pixel_error(std::vector<Skeleton>{a}, std::vector<Skeleton>{b}) == Approx(22.4));
    CHECK(pixel_error(std::vector<Skeleton>{a}, std::vector<Skeleton>{b}, 64) == Approx(6.4));
    CHECK(pixel_error(std::vector<Skeleton>{Skeleton{}}, std::vector<Skeleton>{b}) == 0.0);
  }

  TEST_CASE("reports") {
    const std::vector<Skeleton> gts{torso10()};
    const auto r = pck(gts, gts);
    CHECK(report_csv_header() == "label,head,wrist,elbow,shoulder,hip,knee,ankle,all");
    CHECK(report_csv_row(r, "x").rfind("x,100.0,", 0) == 0);
    CHECK(report_json(r).find("\"overall\"") != std::string::npos);
    const std::vector<double> alphas{0.1, 0.2};
    CHECK(curve_csv(pck_curve(gts, gts, alphas)).rfind("alpha,pck\n", 0) == 0);
  }
}
