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

#include <cmath>

#include "posereg/error.hpp"
#include "posereg/inference.hpp"
#include "posereg/synth.hpp"
#include "test_support.hpp"

using namespace posereg;
using doctest::Approx;

namespace {

Parameters<float> random_params(std::uint64_t seed) {
  auto p = init_parameters<float>(NetworkConfig::preset("desk-64"), seed);
  Rng rng(seed + 100);
  for (auto& l : p.layers)
    for (float& b : l.bias) b = static_cast<float>(rng.uniform(-0.3, 0.3));
  return p;
}

Tensor<float> random_crop(Rng& rng, std::size_t side = 64) {
  Tensor<float> t(Shape{side, side, 3});
  for (float& v : t) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

Tensor<float> mirror(const Tensor<float>& t) {
  const std::size_t h = t.shape()[0], w = t.shape()[1];
  Tensor<float> out(t.shape());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.data()[(y * w + x) * 3 + c] = t.data()[(y * w + (w - 1 - x)) * 3 + c];
  return out;
}

FrameDetections frame(const std::string& image, std::vector<BBox> boxes) {
  FrameDetections f{image, {}};
  double score = 0.9;
  for (const auto& b : boxes) f.boxes.push_back({b, score -= 0.1});
  return f;
}

PersonAnnotation person_with_box(const std::string& image, const BBox& box) {
  PersonAnnotation a;
  a.image = image;
  a.skeleton.set(JointId::kHead, box.center());
  a.gt_box = box;
  return a;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("flip averaging is flip equivariant") {
    Rng rng(41);
    for (int n = 0; n < 10; ++n) {
      const auto p = random_params(n);
      const auto crop = random_crop(rng);
      const PoseVector a = predict_person(p, mirror(crop));
      const PoseVector b = hflip_pose(predict_person(p, crop));
      for (std::size_t i = 0; i < kPoseDim; ++i) REQUIRE(std::abs(a[i] - b[i]) <= 1e-6);
    }
  }

  TEST_CASE("predict_crops agrees with predict_person") {
    Rng rng(42);
    const auto p = random_params(3);
    std::vector<TrainCrop> crops(5);
    for (auto& c : crops) c.pixels = random_crop(rng);
    const auto batched = predict_crops(p, crops, true, 2);
    for (std::size_t i = 0; i < crops.size(); ++i) {
      const PoseVector one = predict_person(p, crops[i].pixels);
      for (std::size_t k = 0; k < kPoseDim; ++k) REQUIRE(batched[i][k] == Approx(one[k]).epsilon(1e-5));
    }
  }

  TEST_CASE("predict_frame is translation invariant under the oracle detector") {
    Rng rng(43);
    const auto p = random_params(4);
    const RasterImage small = testing::random_image(rng, 60, 70);
    PersonAnnotation ann;
    ann.image = "a";
    for (JointId j : kAllJoints) ann.skeleton.set(j, {rng.uniform(10, 50), rng.uniform(5, 65)});
    const int dx = 17, dy = 9;
    RasterImage big(100, 100, 0);
    for (int y = 0; y < small.height(); ++y)
      for (int x = 0; x < small.width(); ++x)
        for (int c = 0; c < 3; ++c) big.at(x + dx, y + dy, c) = small.at(x, y, c);
    PersonAnnotation moved = ann;
    moved.image = "b";
    for (JointId j : kAllJoints) moved.skeleton.set(j, {ann.skeleton[j]->x + dx, ann.skeleton[j]->y + dy});

    const OracleDetector det({ann, moved});
    const auto a = predict_frame(p, det, "a", small);
    const auto b = predict_frame(p, det, "b", big);
    REQUIRE(a.people.size() == 1);
    REQUIRE(b.people.size() == 1);
    for (JointId j : kAllJoints) {
      REQUIRE(std::abs(b.people[0].skeleton[j]->x - a.people[0].skeleton[j]->x - dx) <= 1e-4);
      REQUIRE(std::abs(b.people[0].skeleton[j]->y - a.people[0].skeleton[j]->y - dy) <= 1e-4);
    }
    CHECK(det.detect("unknown", small).empty());
  }

  TEST_CASE("file detector") {
    const FileDetector det({frame("x.png", {{0, 0, 5, 5}})});
    CHECK(det.detect("x.png", RasterImage(4, 4)).size() == 1);
    CHECK_THROWS_AS(det.detect("y.png", RasterImage(4, 4)), DataError);
  }

  TEST_CASE("blob detector finds synthetic figures") {
    SynthConfig c = SynthConfig::preset("wide");
    c.count = 20;
    c.people_per_frame = 2;
    c.width = 192;
    const auto r = synth_generate(c, 3);
    std::vector<FrameDetections> dets;
    for (std::size_t i = 0; i < r.images.size(); ++i) {
      dets.push_back({r.image_names[i], BlobDetector{}.detect(r.image_names[i], r.images[i])});
    }
    const auto rates = detector_eval(dets, r.annotations);
    CHECK(rates.false_negative_rate <= 0.1);
    CHECK(rates.false_positive_rate <= 0.2);
    CHECK(BlobDetector{}.detect("flat", RasterImage(30, 30, 90)).empty());
  }

  TEST_CASE("detector bookkeeping") {
    const BBox g1{0, 0, 10, 10}, g2{50, 50, 60, 60};
    const std::vector<PersonAnnotation> gts{person_with_box("f", g1), person_with_box("f", g2)};

    auto r = detector_eval({frame("f", {g1, g2})}, gts);
    CHECK(r.false_positive_rate == 0.0);
    CHECK(r.false_negative_rate == 0.0);

    // IoU exactly 0.5 is a false detection.
    const std::vector<PersonAnnotation> one{person_with_box("f", g1)};
    r = detector_eval({frame("f", {{0, 0, 10, 5}})}, one);
    CHECK(r.false_detections == 1);
    CHECK(r.missed == 1);
    r = detector_eval({frame("f", {{0, 0, 10, 5.01}})}, one);
    CHECK(r.false_detections == 0);

    r = detector_eval({frame("f", {g1, {100, 100, 110, 110}, {200, 0, 210, 10}})}, gts);
    CHECK(r.detections == 3);
    CHECK(r.false_positive_rate == Approx(2.0 / 3.0));
    CHECK(r.false_negative_rate == Approx(0.5));

    // One ground truth cannot absorb two detections.
    r = detector_eval({frame("f", {g1, g1})}, one);
    CHECK(r.false_detections == 1);
    // Frames without ground truth count every detection as false.
    r = detector_eval({frame("g", {g1})}, one);
    CHECK(r.false_detections == 1);
    CHECK(r.missed == 1);
  }

  TEST_CASE("prediction files round trip") {
    testing::TempDir dir("pred");
    FramePrediction fp{"img.png", {}};
    PersonPrediction person{{1, 2, 30, 40}, 0.75, {}};
    for (JointId j : kAllJoints) person.skeleton.set(j, {double(index_of(j)), 2.0 * double(index_of(j)) + 0.5});
    fp.people.push_back(person);
    write_predictions(dir / "p.jsonl", {fp});
    const auto back = load_predictions(dir / "p.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].image == "img.png");
    REQUIRE(back[0].people.size() == 1);
    CHECK(back[0].people[0].box == person.box);
    CHECK(back[0].people[0].skeleton == person.skeleton);

    PersonAnnotation a;
    a.image = "img.png";
    a.skeleton = person.skeleton;
    const auto matched = match_predictions(back, {a, person_with_box("other.png", {0, 0, 4, 4})});
    REQUIRE(matched.size() == 2);
    CHECK(matched[0] == person.skeleton);
    CHECK(matched[1].empty());
  }
}
