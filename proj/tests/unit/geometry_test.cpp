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
#include "posereg/geometry.hpp"
#include "posereg/skeleton.hpp"
#include "test_support.hpp"

using namespace posereg;
using doctest::Approx;

TEST_SUITE("geometry") {
  TEST_CASE("iou examples") {
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
    CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(iou({0, 0, 0, 0}, {3, 3, 3, 3}), InvalidInput);
    // one degenerate box is fine
    CHECK(iou({0, 0, 10, 10}, {2, 2, 2, 8}) == 0.0);
  }

  TEST_CASE("iou matches cell counting on integer boxes") {
    Rng rng(11);
    for (int n = 0; n < 500; ++n) {
      const int ax0 = int(rng.index(30)), ay0 = int(rng.index(30));
      const int bx0 = int(rng.index(30)), by0 = int(rng.index(30));
      const int ax1 = ax0 + 1 + int(rng.index(20)), ay1 = ay0 + 1 + int(rng.index(20));
      const int bx1 = bx0 + 1 + int(rng.index(20)), by1 = by0 + 1 + int(rng.index(20));
      const BBox a{double(ax0), double(ay0), double(ax1), double(ay1)};
      const BBox b{double(bx0), double(by0), double(bx1), double(by1)};
      REQUIRE(iou(a, b) == oracle::iou_by_cells(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1));
    }
  }

  TEST_CASE("iou properties") {
    Rng rng(12);
    for (int n = 0; n < 1000; ++n) {
      const BBox a = testing::random_box(rng), b = testing::random_box(rng);
      const double v = iou(a, b);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      REQUIRE(v == iou(b, a));
      REQUIRE(iou(a, a) == Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("expand about center") {
    CHECK(expand_about_center({0, 0, 10, 10}, 1.0) == BBox{0, 0, 10, 10});
    const BBox e = expand_about_center({0, 0, 10, 10}, 1.2);
    CHECK(e.x_min == Approx(-1));
    CHECK(e.y_min == Approx(-1));
    CHECK(e.x_max == Approx(11));
    CHECK(e.y_max == Approx(11));
    const BBox f = expand_about_center({0, 0, 10, 20}, 1.2);
    CHECK(f.x_min == Approx(-1));
    CHECK(f.y_min == Approx(-2));
    CHECK(f.x_max == Approx(11));
    CHECK(f.y_max == Approx(22));
    CHECK_THROWS_AS(expand_about_center({0, 0, 1, 1}, 0.0), InvalidInput);
    CHECK_THROWS_AS(expand_about_center({0, 0, 1, 1}, -2.0), InvalidInput);

    Rng rng(13);
    for (int n = 0; n < 200; ++n) {
      const BBox b = testing::random_box(rng);
      const double f = rng.uniform(0.1, 3.0);
      const BBox x = expand_about_center(b, f);
      REQUIRE(x.area() == Approx(f * f * b.area()).epsilon(1e-6));
      REQUIRE(x.center().x == Approx(b.center().x).epsilon(1e-9));
    }
  }

  TEST_CASE("tight box") {
    Skeleton one;
    one.set(JointId::kHead, {5, 5});
    CHECK(tight_box(one) == BBox{5, 5, 5, 5});
    Skeleton three;
    three.set(JointId::kHead, {3, 1});
    three.set(JointId::kLeftKnee, {7, 9});
    three.set(JointId::kRightWrist, {-2, 4});
    CHECK(tight_box(three) == BBox{-2, 1, 7, 9});
    CHECK_THROWS_AS(tight_box(Skeleton{}), InvalidInput);
  }

  TEST_CASE("squarify") {
    CHECK(squarify({0, 0, 10, 10}) == BBox{0, 0, 10, 10});
    CHECK(squarify({0, 0, 40, 80}) == BBox{-20, 0, 60, 80});
    CHECK(squarify({10, 20, 50, 100}) == BBox{-10, 20, 70, 100});
    CHECK_THROWS_AS(squarify({0, 0, 0, 5}), InvalidInput);

    // Quarter-pixel coordinates keep both formulas exact.
    Rng rng(14);
    for (int n = 0; n < 1000; ++n) {
      const double x0 = double(rng.index(400)) / 4 - 50, y0 = double(rng.index(400)) / 4 - 50;
      const BBox b{x0, y0, x0 + 0.25 * (1 + rng.index(200)), y0 + 0.25 * (1 + rng.index(200))};
      const BBox s = squarify(b);
      REQUIRE(s == oracle::squarify(b));
      REQUIRE(squarify(s) == s);
    }
  }

  TEST_CASE("crop_zero_pad examples") {
    RasterImage flat(40, 30, 77);
    const RasterImage inside = crop_zero_pad(flat, {5, 5, 25, 25}, 13);
    for (auto v : inside.pixels()) REQUIRE(v == 77);
    const RasterImage outside = crop_zero_pad(flat, {100, 100, 150, 150}, 16);
    for (auto v : outside.pixels()) REQUIRE(v == 0);
    CHECK_THROWS_AS(crop_zero_pad(flat, {0, 0, 10, 10}, 0), InvalidInput);

    Rng rng(15);
    const RasterImage img = testing::random_image(rng, 80, 80);
    const RasterImage c = crop_zero_pad(img, {-10, 0, 70, 80}, 80);
    for (int y = 0; y < 80; ++y) {
      for (int x = 0; x < 80; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          const int expected = x < 10 ? 0 : img.at(x - 10, y, ch);
          REQUIRE(int(c.at(x, y, ch)) == expected);
        }
      }
    }
  }

  TEST_CASE("crop_zero_pad at native size is the naive crop") {
    Rng rng(16);
    for (int n = 0; n < 100; ++n) {
      const RasterImage img = testing::random_image(rng, 10 + int(rng.index(30)), 10 + int(rng.index(30)));
      const int side = 1 + int(rng.index(40));
      const int x0 = int(rng.index(60)) - 25, y0 = int(rng.index(60)) - 25;
      const RasterImage fused = crop_zero_pad(img, {double(x0), double(y0), double(x0 + side), double(y0 + side)}, side);
      REQUIRE(fused == oracle::crop(img, x0, y0, side));
    }
  }

  TEST_CASE("fused crop and resize within one level of two passes") {
    Rng rng(17);
    for (int n = 0; n < 200; ++n) {
      const RasterImage img = testing::random_image(rng, 8 + int(rng.index(40)), 8 + int(rng.index(40)));
      const int side = 1 + int(rng.index(60));
      const int target = 1 + int(rng.index(48));
      const int x0 = int(rng.index(70)) - 30, y0 = int(rng.index(70)) - 30;
      const RasterImage fused =
          crop_zero_pad(img, {double(x0), double(y0), double(x0 + side), double(y0 + side)}, target);
      const RasterImage two_pass = oracle::resize(oracle::crop(img, x0, y0, side), target, target);
      REQUIRE(oracle::max_abs_diff(fused, two_pass) <= 1);
    }
  }

  TEST_CASE("resize_bilinear") {
    Rng rng(18);
    const RasterImage img = testing::random_image(rng, 17, 9);
    CHECK(resize_bilinear(img, 17, 9) == img);
    const RasterImage flat(2, 2, 200);
    const RasterImage flat_up = resize_bilinear(flat, 4);
    for (auto v : flat_up.pixels()) CHECK(v == 200);

    RasterImage row(2, 1);
    for (int c = 0; c < 3; ++c) row.at(1, 0, c) = 255;
    const RasterImage up = resize_bilinear(row, 4, 1);
    CHECK(up == oracle::resize(row, 4, 1));
    CHECK(int(up.at(0, 0, 0)) == 0);
    CHECK(int(up.at(1, 0, 0)) == 64);
    CHECK(int(up.at(2, 0, 0)) == 191);
    CHECK(int(up.at(3, 0, 0)) == 255);

    for (int n = 0; n < 100; ++n) {
      const RasterImage src = testing::random_image(rng, 1 + int(rng.index(30)), 1 + int(rng.index(30)));
      const int ow = 1 + int(rng.index(40)), oh = 1 + int(rng.index(40));
      REQUIRE(oracle::max_abs_diff(resize_bilinear(src, ow, oh), oracle::resize(src, ow, oh)) <= 1);
    }
    CHECK_THROWS_AS(resize_bilinear(img, 0), InvalidInput);
  }

  TEST_CASE("crop coordinates") {
    const CropSpec crop = CropSpec::make({10, 20, 50, 60}, 64);
    CHECK(to_crop_coords({10, 20}, crop) == Point2{0, 0});
    CHECK(to_crop_coords({30, 40}, crop) == Point2{0.5, 0.5});
    CHECK(from_crop_coords({0, 0}, crop) == Point2{10, 20});
    CHECK(from_crop_coords({1, 1}, crop) == Point2{50, 60});
    CHECK_THROWS_AS(CropSpec::make({0, 0, 10, 20}, 8), InvalidInput);

    Rng rng(19);
    for (int n = 0; n < 1000; ++n) {
      const BBox sq = squarify(testing::random_box(rng));
      const CropSpec c = CropSpec::make(sq, 64);
      const Point2 p{rng.uniform(-100, 200), rng.uniform(-100, 200)};
      const Point2 back = from_crop_coords(to_crop_coords(p, c), c);
      REQUIRE(std::abs(back.x - p.x) <= 1e-6);
      REQUIRE(std::abs(back.y - p.y) <= 1e-6);
    }
  }

  TEST_CASE("horizontal flips") {
    Rng rng(20);
    const RasterImage img = testing::random_image(rng, 13, 7);
    CHECK(hflip_image(hflip_image(img)) == img);
    CHECK(hflip_image(img).at(0, 3, 1) == img.at(12, 3, 1));

    Skeleton sk;
    sk.set(JointId::kLeftWrist, {0.2, 0.4});
    const Skeleton f = hflip_skeleton(sk, 1.0);
    CHECK_FALSE(f.has(JointId::kLeftWrist));
    REQUIRE(f.has(JointId::kRightWrist));
    CHECK(f[JointId::kRightWrist]->x == Approx(0.8));
    CHECK(f[JointId::kRightWrist]->y == 0.4);

    Skeleton knee;
    knee.set(JointId::kLeftKnee, {3, 3});
    const Skeleton fk = hflip_skeleton(knee, 10);
    CHECK(fk.present_count() == 1);
    CHECK(fk.has(JointId::kRightKnee));

    Skeleton head;
    head.set(JointId::kHead, {0.25, 0.5});
    CHECK(hflip_skeleton(head, 1.0)[JointId::kHead]->x == 0.75);

    for (int n = 0; n < 100; ++n) {
      const Skeleton s = testing::random_skeleton(rng, 1.0, 0.6);
      const Skeleton twice = hflip_skeleton(hflip_skeleton(s, 1.0), 1.0);
      for (JointId j : kAllJoints) {
        REQUIRE(twice.has(j) == s.has(j));
        if (s.has(j)) REQUIRE(twice[j]->x == Approx(s[j]->x).epsilon(1e-12));
      }
      REQUIRE(hflip_pose(hflip_pose(s.to_vector())) == s.to_vector());
    }
  }
}
