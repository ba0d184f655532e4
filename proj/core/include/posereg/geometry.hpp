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

#ifndef POSEREG_GEOMETRY_HPP_
#define POSEREG_GEOMETRY_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace posereg {

/// Continuous pixel coordinates. Pixel column c covers [c, c+1), so its
/// center sits at c + 0.5.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Axis-aligned box in continuous pixel coordinates.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  Point2 center() const noexcept { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }
  bool valid() const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// A square source region plus the side of the raster it is resampled to.
struct CropSpec {
  BBox square;
  int target_side = 1;

  /// Throws InvalidInput unless the square has equal sides (1e-6) and
  /// target_side >= 1.
  static CropSpec make(const BBox& square, int target_side);
  double side() const noexcept { return square.width(); }
};

/// Interleaved 8-bit RGB image, row-major.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  RasterImage(int width, int height, std::uint8_t fill = 0);
  RasterImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }

  std::span<std::uint8_t> pixels() noexcept { return pixels_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Intersection over union. Throws InvalidInput when both boxes are
/// degenerate (the union has no area).
double iou(const BBox& a, const BBox& b);

/// Scales each side by `factor` about the box center.
BBox expand_about_center(const BBox& b, double factor);

/// Grows the shorter side to the longer one about the center.
BBox squarify(const BBox& b);

/// Samples `square` out of `img` onto a target_side x target_side raster.
/// Source pixels outside the image read as zero. Equivalent to a native
/// resolution crop with zero padding followed by resize_bilinear, done in
/// one pass: sample positions are clamped to the square's edge pixel
/// centers exactly as the two-pass resize clamps to the crop's border.
RasterImage crop_zero_pad(const RasterImage& img, const BBox& square, int target_side);

/// Bilinear resize to side x side, half-pixel-center alignment, edge clamp.
RasterImage resize_bilinear(const RasterImage& img, int side);
/// Non-square variant used by resize_bilinear.
RasterImage resize_bilinear(const RasterImage& img, int out_width, int out_height);

Point2 to_crop_coords(const Point2& p, const CropSpec& crop);
Point2 from_crop_coords(const Point2& p_norm, const CropSpec& crop);

/// Mirror columns: pixel column c moves to width - 1 - c.
RasterImage hflip_image(const RasterImage& img);

}  // namespace posereg

#endif  // POSEREG_GEOMETRY_HPP_
