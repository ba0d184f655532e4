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

#ifndef POSEREG_SYNTH_HPP_
#define POSEREG_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "posereg/dataset.hpp"
#include "posereg/geometry.hpp"

namespace posereg {

enum class BackgroundStyle { kFlat, kNoise };

/// kRandom draws every part color independently, kJitter perturbs the fixed
/// part colors per figure, kFixed uses them as given.
enum class Palette { kRandom, kJitter, kFixed };

struct AngleRange {
  double min_deg = 0.0;
  double max_deg = 0.0;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Procedural stick-figure scenes. Limb angles are measured from hanging
/// straight down, positive away from the body midline; the figure faces
/// the viewer, so its right side is drawn toward smaller x.
struct SynthConfig {
  std::string name = "wide";
  int width = 96;
  int height = 96;
  std::size_t count = 100;
  int people_per_frame = 1;
  std::string image_format = "png";  // "png" or "ppm"

  double figure_height_min = 56.0;  // head to ankle, pixels, standing straight
  double figure_height_max = 80.0;
  double margin = 2.0;              // min distance from any joint to the border
  double placement_spread = 1.0;    // 0 centers the figure, 1 uses the full slot

  double thickness_min = 2.0;
  double thickness_max = 2.0;
  AngleRange lean{-10, 10};
  AngleRange head_tilt{-15, 15};
  AngleRange upper_arm{0, 110};
  AngleRange forearm{-40, 70};
  AngleRange thigh{0, 30};
  AngleRange shin{-10, 25};

  BackgroundStyle background = BackgroundStyle::kNoise;
  double noise_amplitude = 10.0;
  Palette palette = Palette::kJitter;
  double color_jitter = 40.0;  // per-channel amplitude for kJitter
  /// Non-fixed palettes draw a random background: 0 gives a random gray level,
  /// 1 a fully random color.
  double background_saturation = 0.0;
  Rgb background_color{90, 90, 90};
  Rgb torso_color{200, 40, 40};
  Rgb arm_color{230, 200, 40};
  Rgb leg_color{40, 60, 220};
  Rgb head_color{240, 190, 150};

  /// Fraction of people annotated upper body only (head, shoulders, elbows,
  /// wrists); those records carry the full-body expanded box as gt_box.
  double partial_fraction = 0.0;

  /// "wide" (varied poses with arms below shoulder height, jittered colors,
  /// random gray backgrounds) or "narrow" (raised-arm gestures, fixed
  /// palette, thicker limbs).
  static SynthConfig preset(std::string_view name);
  /// Throws DataError when figures could not be placed inside the frame.
  void validate() const;
};

struct SynthResult {
  std::vector<RasterImage> images;             // images[i] is named image_name(i)
  std::vector<PersonAnnotation> annotations;   // people_per_frame entries per image
  std::vector<std::string> image_names;
};

/// Deterministic in (config, seed).
SynthResult synth_generate(const SynthConfig& config, std::uint64_t seed);

std::string synth_image_name(std::size_t index, std::string_view format);

}  // namespace posereg

#endif  // POSEREG_SYNTH_HPP_
