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

#include "posereg/dataset.hpp"
#include "posereg/error.hpp"
#include "posereg/image_io.hpp"
#include "posereg/parallel.hpp"
#include "test_support.hpp"

using namespace posereg;
using doctest::Approx;

namespace {

// Detection inside gt (0,0,100,100) whose IoU is exactly k / 100.
DetectionBox detection_with_iou_percent(int k) {
  if (k == 0) return {{200, 200, 210, 210}, 0.9};
  return {{0, 0, 100, double(k)}, 0.9};
}

PersonAnnotation standing_person(const std::string& image) {
  PersonAnnotation a;
  a.image = image;
  Rng rng(3);
  for (JointId j : kAllJoints) a.skeleton.set(j, {rng.uniform(20, 40), rng.uniform(10, 70)});
  return a;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("load annotations") {
    testing::TempDir dir("ann");
    RasterImage img(8, 8);
    write_image(dir / "a.png", img);

    testing::write_text(dir / "empty.jsonl", "");
    CHECK(load_annotations(dir / "empty.jsonl").empty());

    std::string full = R"({"image": "a.png", "joints": {)";
    for (std::size_t i = 0; i < kNumJoints; ++i) {
      full += (i ? ", " : "") + std::string("\"") + std::string(joint_name(kAllJoints[i])) + "\": [1, 2]";
    }
    full += "}}\n";
    const std::string upper =
        R"({"image": "a.png", "joints": {"head": [1,1], "l_shoulder": [2,2], "r_shoulder": [3,3], )"
        R"("l_elbow": [4,4], "r_elbow": [5,5], "l_wrist": [6,6], "r_wrist": [7,7]}, "gt_box": [0,0,8,8]})"
        "\n";
    testing::write_text(dir / "two.jsonl", full + upper);
    const auto anns = load_annotations(dir / "two.jsonl");
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].skeleton.present_count() == 13);
    CHECK(anns[1].skeleton.present_count() == 7);
    CHECK_FALSE(anns[1].skeleton.has(JointId::kLeftHip));
    REQUIRE(anns[1].gt_box.has_value());
    CHECK(*anns[1].gt_box == BBox{0, 0, 8, 8});
    CHECK(expanded_gt_box(anns[1]) == BBox{0, 0, 8, 8});

    testing::write_text(dir / "bad.jsonl", full + "{not json\n");
    try {
      (void)load_annotations(dir / "bad.jsonl");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    testing::write_text(dir / "unknown.jsonl", R"({"image": "a.png", "joints": {"tail": [1, 1]}})" "\n");
    CHECK_THROWS_AS(load_annotations(dir / "unknown.jsonl"), DataError);
    testing::write_text(dir / "missing.jsonl", R"({"image": "nope.png", "joints": {"head": [1, 1]}})" "\n");
    CHECK_THROWS_AS(load_annotations(dir / "missing.jsonl"), DataError);
    CHECK(load_annotations(dir / "missing.jsonl", false).size() == 1);

    testing::write_text(dir / "neck.jsonl",
                        R"({"image": "a.png", "joints": {"neck": [2, 4], "head_top": [6, 8]}})" "\n");
    const auto neck = load_annotations(dir / "neck.jsonl");
    REQUIRE(neck[0].skeleton.has(JointId::kHead));
    CHECK(*neck[0].skeleton[JointId::kHead] == Point2{4, 6});

    PersonAnnotation round = anns[1];
    CHECK(parse_annotation_line(annotation_to_json(round), 1).skeleton == round.skeleton);
  }

  TEST_CASE("head from neck and top") {
    CHECK(head_from_neck_and_top({0, 0}, {0, 10}) == Point2{0, 5});
    CHECK(head_from_neck_and_top({3, 3}, {3, 3}) == Point2{3, 3});
    CHECK(head_from_neck_and_top({2, 4}, {6, 8}) == Point2{4, 6});
  }

  TEST_CASE("choose boxes follows the overlap table") {
    const BBox gt{0, 0, 100, 100};
    CHECK(choose_boxes(gt, {}).boxes.size() == 1);
    CHECK(choose_boxes(gt, {}).boxes[0].second == BoxOrigin::kGroundTruth);
    CHECK_FALSE(choose_boxes(gt, {}).best_iou.has_value());

    for (int k = 0; k <= 100; ++k) {
      const auto plan = choose_boxes(gt, {detection_with_iou_percent(k)});
      REQUIRE(plan.best_iou.has_value());
      REQUIRE(*plan.best_iou == k / 100.0);
      if (k > 70) {
        REQUIRE(plan.boxes.size() == 1);
        REQUIRE(plan.boxes[0].second == BoxOrigin::kDetector);
      } else if (k < 50) {
        REQUIRE(plan.boxes.size() == 1);
        REQUIRE(plan.boxes[0].second == BoxOrigin::kGroundTruth);
      } else {
        REQUIRE(plan.boxes.size() == 2);
      }
    }
    // The best of several detections decides.
    const auto plan = choose_boxes(gt, {detection_with_iou_percent(30), detection_with_iou_percent(80)});
    REQUIRE(plan.boxes.size() == 1);
    CHECK(plan.boxes[0].first == detection_with_iou_percent(80).box);
  }

  TEST_CASE("normalize pixels") {
    RasterImage img(3, 1);
    img.at(0, 0, 0) = 127;
    img.at(1, 0, 0) = 255;
    img.at(2, 0, 0) = 0;
    const auto t = normalize_pixels(img);
    CHECK(t.shape() == Shape{1, 3, 3});
    CHECK(t.data()[0] == 0.0f);
    CHECK(t.data()[3] == 1.0f);
    CHECK(t.data()[6] == -0.9921875f);
  }

  TEST_CASE("targets and weights") {
    const CropSpec crop = CropSpec::make({0, 0, 10, 10}, 64);
    Skeleton full;
    for (JointId j : kAllJoints) full.set(j, {5, 5});
    const auto [t, w] = targets_and_weights(full, crop);
    for (std::size_t i = 0; i < kPoseDim; ++i) {
      CHECK(w[i] == 1.0);
      CHECK(t[i] == 0.5);
    }
    Skeleton upper;
    for (JointId j : {JointId::kHead, JointId::kLeftShoulder, JointId::kRightShoulder, JointId::kLeftElbow,
                      JointId::kRightElbow, JointId::kLeftWrist, JointId::kRightWrist}) {
      upper.set(j, {1, 2});
    }
    const auto [tu, wu] = targets_and_weights(upper, crop);
    int ones = 0;
    for (std::size_t i = 0; i < kPoseDim; ++i) {
      ones += wu[i] == 1.0;
      if (wu[i] == 0.0) CHECK(tu[i] == 0.0);
    }
    CHECK(ones == 14);
  }

  TEST_CASE("make crops") {
    Rng rng(4);
    const RasterImage frame = testing::random_image(rng, 64, 80);
    const PersonAnnotation ann = standing_person("f.png");
    const BBox gt = expanded_gt_box(ann);
    CHECK(make_crops(ann, frame, {}, 32).size() == 2);
    CHECK(make_crops(ann, frame, {{gt, 0.9}}, 32).size() == 2);
    // shrink the detection until the IoU lands between 0.5 and 0.7
    const BBox mid{gt.x_min, gt.y_min, gt.x_max, gt.y_min + 0.6 * gt.height()};
    CHECK(make_crops(ann, frame, {{mid, 0.9}}, 32).size() == 4);

    for (int n = 0; n < 50; ++n) {
      PersonAnnotation a;
      a.skeleton = testing::random_skeleton(rng, 60, 0.7);
      if (a.skeleton.empty()) continue;
      std::vector<DetectionBox> dets;
      if (rng.bernoulli(0.7)) dets.push_back({testing::random_box(rng, 0, 60, 5), rng.uniform()});
      const auto crops = make_crops(a, frame, dets, 24, 9);
      REQUIRE((crops.size() == 2 || crops.size() == 4));
      for (std::size_t c = 0; c < crops.size(); c += 2) {
        const TrainCrop& plain = crops[c];
        const TrainCrop& flipped = crops[c + 1];
        REQUIRE_FALSE(plain.provenance.flipped);
        REQUIRE(flipped.provenance.flipped);
        REQUIRE(plain.provenance.sample == 9);
        REQUIRE(plain.pixels.shape() == Shape{24, 24, 3});
        REQUIRE(target_skeleton(flipped) == hflip_skeleton(target_skeleton(plain), 1.0));
        for (JointId j : kAllJoints) {
          const std::size_t i = 2 * index_of(j);
          REQUIRE(plain.weights[i] == plain.weights[i + 1]);
          REQUIRE(plain.weights[i] == (a.skeleton.has(j) ? 1.0 : 0.0));
          const auto& p = a.skeleton[j];
          if (p && p->x >= plain.crop.square.x_min && p->x <= plain.crop.square.x_max &&
              p->y >= plain.crop.square.y_min && p->y <= plain.crop.square.y_max) {
            REQUIRE(plain.target[i] >= -1e-12);
            REQUIRE(plain.target[i] <= 1 + 1e-12);
          }
        }
        for (float v : plain.pixels) REQUIRE((v >= -1.0f && v <= 1.0f));
      }
    }
  }

  TEST_CASE("dataset crops keep order under any thread count") {
    Rng rng(5);
    std::vector<RasterImage> frames;
    std::vector<PersonAnnotation> anns;
    for (int i = 0; i < 12; ++i) {
      frames.push_back(testing::random_image(rng, 48, 48));
      PersonAnnotation a;
      a.image = std::to_string(i);
      a.skeleton = testing::random_skeleton(rng, 48, 0.8);
      if (a.skeleton.empty()) a.skeleton.set(JointId::kHead, {10, 10});
      anns.push_back(a);
    }
    const ImageSource images = [&](const PersonAnnotation& a) -> const RasterImage& {
      return frames[std::stoul(a.image)];
    };
    const DetectionSource none = [](const PersonAnnotation&) { return std::vector<DetectionBox>{}; };
    set_thread_count(1);
    const auto serial = make_dataset_crops(anns, images, none, 16);
    set_thread_count(4);
    const auto parallel = make_dataset_crops(anns, images, none, 16);
    set_thread_count(0);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      REQUIRE(serial[i].provenance.sample == i / 2);
      REQUIRE(serial[i].pixels == parallel[i].pixels);
      REQUIRE(serial[i].target == parallel[i].target);
    }
  }
}
