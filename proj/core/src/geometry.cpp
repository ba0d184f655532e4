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

#include "posereg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "posereg/error.hpp"

namespace posereg {

namespace {

void require_valid(const BBox& b, const char* what) {
  if (!b.valid()) {
    throw InvalidInput(std::string(what) + ": invalid box (non-finite or min > max)");
  }
}

std::uint8_t to_intensity(float v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5f), 0.0f, 255.0f));
}

// Bilinear lookup at index-space position (sx, sy) with the four taps read
// through `fetch`. The a + f * (b - a) form keeps constant inputs exact.
template <typename Fetch>
float bilinear(double sx, double sy, int c, Fetch&& fetch) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const float fx = static_cast<float>(sx - fx0);
  const float fy = static_cast<float>(sy - fy0);
  const float a = fetch(x0, y0, c);
  const float b = fetch(x0 + 1, y0, c);
  const float d = fetch(x0, y0 + 1, c);
  const float e = fetch(x0 + 1, y0 + 1, c);
  const float top = a + fx * (b - a);
  const float bottom = d + fx * (e - d);
  return top + fy * (bottom - top);
}

}  // namespace

bool BBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

CropSpec CropSpec::make(const BBox& square, int target_side) {
  require_valid(square, "CropSpec");
  if (std::abs(square.width() - square.height()) > 1e-6) {
    throw InvalidInput("CropSpec: source region is not square");
  }
  if (square.width() <= 0.0) {
    throw InvalidInput("CropSpec: source square has zero side");
  }
  if (target_side < 1) {
    throw InvalidInput("CropSpec: target side must be >= 1, got " + std::to_string(target_side));
  }
  return CropSpec{square, target_side};
}

RasterImage::RasterImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidInput("RasterImage: dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw InvalidInput("RasterImage: dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw InvalidInput("RasterImage: buffer length does not match width * height * 3");
  }
}

double iou(const BBox& a, const BBox& b) {
  require_valid(a, "iou");
  require_valid(b, "iou");
  const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) {
    throw InvalidInput("iou: both boxes are degenerate");
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox expand_about_center(const BBox& b, double factor) {
  require_valid(b, "expand_about_center");
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidInput("expand_about_center: factor must be positive");
  }
  const Point2 c = b.center();
  const double hw = b.width() * factor / 2;
  const double hh = b.height() * factor / 2;
  return {c.x - hw, c.y - hh, c.x + hw, c.y + hh};
}

BBox squarify(const BBox& b) {
  require_valid(b, "squarify");
  if (!(b.area() > 0.0)) {
    throw InvalidInput("squarify: box has zero area");
  }
  const Point2 c = b.center();
  const double half = std::max(b.width(), b.height()) / 2;
  return {c.x - half, c.y - half, c.x + half, c.y + half};
}

RasterImage crop_zero_pad(const RasterImage& img, const BBox& square, int target_side) {
  if (target_side < 1) {
    throw InvalidInput("crop_zero_pad: target side must be >= 1");
  }
  require_valid(square, "crop_zero_pad");
  const double side = square.width();
  if (!(side > 0.0)) {
    throw InvalidInput("crop_zero_pad: square side must be positive");
  }

  // Index-space range of the crop's edge pixel centers.
  double lo_x = square.x_min;
  double hi_x = square.x_min + side - 1.0;
  double lo_y = square.y_min;
  double hi_y = square.y_min + side - 1.0;
  if (hi_x < lo_x) lo_x = hi_x = square.x_min + (side - 1.0) / 2;
  if (hi_y < lo_y) lo_y = hi_y = square.y_min + (side - 1.0) / 2;

  const int w = img.width();
  const int h = img.height();
  auto fetch = [&](int x, int y, int c) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
    return img.at(x, y, c);
  };

  RasterImage out(target_side, target_side);
  const double scale = side / target_side;
  for (int i = 0; i < target_side; ++i) {
    const double sy = std::clamp(square.y_min + (i + 0.5) * scale - 0.5, lo_y, hi_y);
    for (int j = 0; j < target_side; ++j) {
      const double sx = std::clamp(square.x_min + (j + 0.5) * scale - 0.5, lo_x, hi_x);
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        out.at(j, i, c) = to_intensity(bilinear(sx, sy, c, fetch));
      }
    }
  }
  return out;
}

RasterImage resize_bilinear(const RasterImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) {
    throw InvalidInput("resize_bilinear: output side must be >= 1");
  }
  if (img.empty()) {
    throw InvalidInput("resize_bilinear: empty image");
  }
  const int w = img.width();
  const int h = img.height();
  auto fetch = [&](int x, int y, int c) -> float {
    return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), c);
  };
  RasterImage out(out_width, out_height);
  const double sx_scale = static_cast<double>(w) / out_width;
  const double sy_scale = static_cast<double>(h) / out_height;
  for (int i = 0; i < out_height; ++i) {
    const double sy = std::clamp((i + 0.5) * sy_scale - 0.5, 0.0, h - 1.0);
    for (int j = 0; j < out_width; ++j) {
      const double sx = std::clamp((j + 0.5) * sx_scale - 0.5, 0.0, w - 1.0);
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        out.at(j, i, c) = to_intensity(bilinear(sx, sy, c, fetch));
      }
    }
  }
  return out;
}

RasterImage resize_bilinear(const RasterImage& img, int side) {
  return resize_bilinear(img, side, side);
}

Point2 to_crop_coords(const Point2& p, const CropSpec& crop) {
  const double side = crop.side();
  return {(p.x - crop.square.x_min) / side, (p.y - crop.square.y_min) / side};
}

Point2 from_crop_coords(const Point2& p_norm, const CropSpec& crop) {
  const double side = crop.side();
  return {crop.square.x_min + p_norm.x * side, crop.square.y_min + p_norm.y * side};
}

RasterImage hflip_image(const RasterImage& img) {
  if (img.empty()) return img;
  RasterImage out(img.width(), img.height());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        out.at(w - 1 - x, y, c) = img.at(x, y, c);
      }
    }
  }
  return out;
}

}  // namespace posereg
