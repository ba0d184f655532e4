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

#include "posereg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "posereg/error.hpp"
#include "posereg/rng.hpp"

namespace posereg {

namespace {

// Body proportions in units of the standing head-to-ankle height.
constexpr double kHeadAboveNeck = 0.14;
constexpr double kTorso = 0.34;
constexpr double kThigh = 0.27;
constexpr double kShin = 0.25;
constexpr double kUpperArm = 0.18;
constexpr double kForearm = 0.16;
constexpr double kShoulderHalf = 0.11;
constexpr double kHipHalf = 0.07;
constexpr double kHeadRadius = 0.065;
constexpr double kExtremityRadius = 0.03;
constexpr double kMinContrast = 110.0;

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

double draw(Rng& rng, const AngleRange& r) { return radians(rng.uniform(r.min_deg, r.max_deg)); }

struct Figure {
  Skeleton skeleton;
  double thickness;
  double head_radius;
  double extremity_radius;  // hand and foot discs
  Rgb torso, arm, leg, head;
};

Point2 add(Point2 a, double len, double angle_from_down, double side) {
  // side = -1 for the figure's right (image left), +1 for its left.
  return {a.x + side * len * std::sin(angle_from_down), a.y + len * std::cos(angle_from_down)};
}

// Pose in body units with the pelvis at the origin.
Skeleton sample_pose(const SynthConfig& c, Rng& rng) {
  const double lean = draw(rng, c.lean);
  const Point2 up{std::sin(lean), -std::cos(lean)};
  const Point2 across{std::cos(lean), std::sin(lean)};
  const Point2 pelvis{0, 0};
  const Point2 neck{up.x * kTorso, up.y * kTorso};
  const double tilt = lean + draw(rng, c.head_tilt);
  const Point2 head{neck.x + kHeadAboveNeck * std::sin(tilt), neck.y - kHeadAboveNeck * std::cos(tilt)};

  Skeleton sk;
  sk.set(JointId::kHead, head);
  struct Side {
    double sign;
    JointId shoulder, elbow, wrist, hip, knee, ankle;
  };
  const Side sides[] = {
      {-1, JointId::kRightShoulder, JointId::kRightElbow, JointId::kRightWrist, JointId::kRightHip,
       JointId::kRightKnee, JointId::kRightAnkle},
      {+1, JointId::kLeftShoulder, JointId::kLeftElbow, JointId::kLeftWrist, JointId::kLeftHip, JointId::kLeftKnee,
       JointId::kLeftAnkle},
  };
  for (const Side& s : sides) {
    const Point2 shoulder{neck.x + s.sign * kShoulderHalf * across.x, neck.y + s.sign * kShoulderHalf * across.y};
    const Point2 hip{pelvis.x + s.sign * kHipHalf * across.x, pelvis.y + s.sign * kHipHalf * across.y};
    const double upper = draw(rng, c.upper_arm);
    const double fore = upper + draw(rng, c.forearm);
    const double thigh = draw(rng, c.thigh);
    const double shin = thigh + draw(rng, c.shin);
    const Point2 elbow = add(shoulder, kUpperArm, upper, s.sign);
    const Point2 knee = add(hip, kThigh, thigh, s.sign);
    sk.set(s.shoulder, shoulder);
    sk.set(s.elbow, elbow);
    sk.set(s.wrist, add(elbow, kForearm, fore, s.sign));
    sk.set(s.hip, hip);
    sk.set(s.knee, knee);
    sk.set(s.ankle, add(knee, kShin, shin, s.sign));
  }
  return sk;
}

double contrast(const Rgb& a, const Rgb& b) {
  double m = 0;
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

Rgb random_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.index(256)), static_cast<std::uint8_t>(rng.index(256)),
          static_cast<std::uint8_t>(rng.index(256))};
}

Rgb random_background(Rng& rng, double saturation) {
  const Rgb c = random_color(rng);
  const double gray = (double(c[0]) + c[1] + c[2]) / 3;
  Rgb out;
  for (int i = 0; i < 3; ++i) out[i] = static_cast<std::uint8_t>(std::lround(gray + saturation * (c[i] - gray)));
  return out;
}

Rgb contrasting_color(Rng& rng, const Rgb& background) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Rgb c = random_color(rng);
    if (contrast(c, background) >= kMinContrast) return c;
  }
  // Channel-wise opposite always clears the bar.
  return {static_cast<std::uint8_t>(background[0] < 128 ? 255 : 0),
          static_cast<std::uint8_t>(background[1] < 128 ? 255 : 0),
          static_cast<std::uint8_t>(background[2] < 128 ? 255 : 0)};
}

Rgb jittered_color(Rng& rng, const Rgb& base, double amplitude, const Rgb& background) {
  Rgb best = base;
  double best_contrast = -1;
  for (int attempt = 0; attempt < 16; ++attempt) {
    Rgb c;
    for (int i = 0; i < 3; ++i) {
      c[i] = static_cast<std::uint8_t>(std::clamp(std::lround(base[i] + rng.uniform(-amplitude, amplitude)), 0L, 255L));
    }
    const double k = contrast(c, background);
    if (k >= kMinContrast) return c;
    if (k > best_contrast) best = c, best_contrast = k;
  }
  return contrast(best, background) >= contrast(base, background) ? best : base;
}

void blend(RasterImage& img, int x, int y, const Rgb& color, double coverage) {
  for (int c = 0; c < 3; ++c) {
    const double v = img.at(x, y, c) + coverage * (color[c] - double(img.at(x, y, c)));
    img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
}

// Anti-aliased capsule: coverage ramps over one pixel at the edge.
void draw_segment(RasterImage& img, Point2 a, Point2 b, double thickness, const Rgb& color) {
  const double r = thickness / 2;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r - 1)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r - 1)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r + 1)));
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = a.x + t * dx - px, ey = a.y + t * dy - py;
      const double coverage = std::clamp(r + 0.5 - std::sqrt(ex * ex + ey * ey), 0.0, 1.0);
      if (coverage > 0) blend(img, x, y, color, coverage);
    }
  }
}

void draw_figure(RasterImage& img, const Figure& f) {
  const Skeleton& s = f.skeleton;
  auto p = [&](JointId j) { return *s[j]; };
  auto mid = [](Point2 a, Point2 b) { return Point2{(a.x + b.x) / 2, (a.y + b.y) / 2}; };
  const Point2 neck = mid(p(JointId::kRightShoulder), p(JointId::kLeftShoulder));
  const Point2 pelvis = mid(p(JointId::kRightHip), p(JointId::kLeftHip));
  const double t = f.thickness;

  draw_segment(img, p(JointId::kRightHip), p(JointId::kRightKnee), t, f.leg);
  draw_segment(img, p(JointId::kRightKnee), p(JointId::kRightAnkle), t, f.leg);
  draw_segment(img, p(JointId::kLeftHip), p(JointId::kLeftKnee), t, f.leg);
  draw_segment(img, p(JointId::kLeftKnee), p(JointId::kLeftAnkle), t, f.leg);
  draw_segment(img, p(JointId::kRightHip), p(JointId::kLeftHip), t, f.torso);
  draw_segment(img, neck, pelvis, t, f.torso);
  draw_segment(img, p(JointId::kRightShoulder), p(JointId::kLeftShoulder), t, f.torso);
  draw_segment(img, neck, p(JointId::kHead), t, f.torso);
  draw_segment(img, p(JointId::kRightShoulder), p(JointId::kRightElbow), t, f.arm);
  draw_segment(img, p(JointId::kRightElbow), p(JointId::kRightWrist), t, f.arm);
  draw_segment(img, p(JointId::kLeftShoulder), p(JointId::kLeftElbow), t, f.arm);
  draw_segment(img, p(JointId::kLeftElbow), p(JointId::kLeftWrist), t, f.arm);
  // A zero-length capsule is a disc.
  const double d = 2 * f.extremity_radius;
  for (JointId j : {JointId::kRightAnkle, JointId::kLeftAnkle}) draw_segment(img, p(j), p(j), d, f.leg);
  for (JointId j : {JointId::kRightWrist, JointId::kLeftWrist}) draw_segment(img, p(j), p(j), d, f.head);
  draw_segment(img, p(JointId::kHead), p(JointId::kHead), 2 * f.head_radius, f.head);
}

void paint_background(RasterImage& img, const SynthConfig& c, const Rgb& base, Rng& rng) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        double v = base[ch];
        if (c.background == BackgroundStyle::kNoise) v += rng.uniform(-c.noise_amplitude, c.noise_amplitude);
        img.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
}

bool valid_range(const AngleRange& r) {
  return std::isfinite(r.min_deg) && std::isfinite(r.max_deg) && r.min_deg <= r.max_deg;
}

}  // namespace

SynthConfig SynthConfig::preset(std::string_view name) {
  SynthConfig c;
  if (name == "wide") return c;
  if (name == "narrow") {
    c.name = "narrow";
    c.figure_height_min = 64.0;
    c.figure_height_max = 70.0;
    c.placement_spread = 0.3;
    c.thickness_min = c.thickness_max = 3.0;
    c.lean = {-3, 3};
    c.head_tilt = {-5, 5};
    c.upper_arm = {130, 165};
    c.forearm = {-20, 20};
    c.thigh = {4, 12};
    c.shin = {-5, 5};
    c.background = BackgroundStyle::kNoise;
    c.noise_amplitude = 6.0;
    c.palette = Palette::kFixed;
    return c;
  }
  throw InvalidInput("unknown synth preset '" + std::string(name) + "' (known: wide, narrow)");
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& why) { throw DataError("synth config: " + why); };
  if (width < 8 || height < 8) fail("width and height must be >= 8");
  if (people_per_frame < 1) fail("people_per_frame must be >= 1");
  if (image_format != "png" && image_format != "ppm") fail("image_format must be png or ppm");
  if (!(figure_height_min > 0) || !(figure_height_min <= figure_height_max)) {
    fail("need 0 < figure_height_min <= figure_height_max");
  }
  if (!(margin >= 0)) fail("margin must be >= 0");
  if (!(placement_spread >= 0 && placement_spread <= 1)) fail("placement_spread must be in [0, 1]");
  if (!(thickness_min > 0) || !(thickness_min <= thickness_max)) fail("need 0 < thickness_min <= thickness_max");
  for (const AngleRange* r : {&lean, &head_tilt, &upper_arm, &forearm, &thigh, &shin}) {
    if (!valid_range(*r)) fail("angle ranges need min <= max");
  }
  if (!(noise_amplitude >= 0)) fail("noise_amplitude must be >= 0");
  if (!(color_jitter >= 0)) fail("color_jitter must be >= 0");
  if (!(background_saturation >= 0 && background_saturation <= 1)) fail("background_saturation must be in [0, 1]");
  if (!(partial_fraction >= 0 && partial_fraction <= 1)) fail("partial_fraction must be in [0, 1]");
  const double slot_w = static_cast<double>(width) / people_per_frame - 2 * margin;
  const double slot_h = height - 2 * margin;
  if (slot_w < 4 || slot_h < 4) fail("margins leave no room for figures inside the image");
}

std::string synth_image_name(std::size_t index, std::string_view format) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return "images/" + std::string(buf) + "." + std::string(format);
}

SynthResult synth_generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  SynthResult out;
  out.images.reserve(config.count);
  Rng master(seed);
  for (std::size_t i = 0; i < config.count; ++i) {
    Rng rng = master.fork(i);
    const Rgb bg = config.palette == Palette::kFixed ? config.background_color : random_background(rng, config.background_saturation);
    RasterImage img(config.width, config.height);
    paint_background(img, config, bg, rng);
    const std::string name = synth_image_name(i, config.image_format);

    const double slot_w = static_cast<double>(config.width) / config.people_per_frame;
    for (int person = 0; person < config.people_per_frame; ++person) {
      Figure fig;
      const Skeleton unit = sample_pose(config, rng);
      double scale = rng.uniform(config.figure_height_min, config.figure_height_max);
      const BBox ub = tight_box(unit);
      // Shrink poses that would not fit between the margins.
      const double avail_w = slot_w - 2 * config.margin;
      const double avail_h = config.height - 2 * config.margin;
      scale = std::min({scale, avail_w / std::max(ub.width(), 1e-9), avail_h / std::max(ub.height(), 1e-9)});

      const double free_x = avail_w - ub.width() * scale;
      const double free_y = avail_h - ub.height() * scale;
      const double jitter_x = (rng.uniform() - 0.5) * config.placement_spread;
      const double jitter_y = (rng.uniform() - 0.5) * config.placement_spread;
      const double left = person * slot_w + config.margin + free_x * (0.5 + jitter_x);
      const double top = config.margin + free_y * (0.5 + jitter_y);
      for (JointId j : kAllJoints) {
        const Point2 u = *unit[j];
        fig.skeleton.set(j, {left + (u.x - ub.x_min) * scale, top + (u.y - ub.y_min) * scale});
      }
      fig.thickness = rng.uniform(config.thickness_min, config.thickness_max);
      fig.head_radius = std::max(fig.thickness, kHeadRadius * scale);
      fig.extremity_radius = std::max(fig.thickness * 0.75, kExtremityRadius * scale);
      if (config.palette == Palette::kRandom) {
        fig.torso = contrasting_color(rng, bg);
        fig.arm = contrasting_color(rng, bg);
        fig.leg = contrasting_color(rng, bg);
        fig.head = contrasting_color(rng, bg);
      } else if (config.palette == Palette::kJitter) {
        fig.torso = jittered_color(rng, config.torso_color, config.color_jitter, bg);
        fig.arm = jittered_color(rng, config.arm_color, config.color_jitter, bg);
        fig.leg = jittered_color(rng, config.leg_color, config.color_jitter, bg);
        fig.head = jittered_color(rng, config.head_color, config.color_jitter, bg);
      } else {
        fig.torso = config.torso_color;
        fig.arm = config.arm_color;
        fig.leg = config.leg_color;
        fig.head = config.head_color;
      }
      draw_figure(img, fig);

      PersonAnnotation ann{name, fig.skeleton, std::nullopt};
      if (config.partial_fraction > 0 && rng.bernoulli(config.partial_fraction)) {
        ann.gt_box = expand_about_center(tight_box(fig.skeleton), kGroundTruthExpansion);
        for (JointId j : {JointId::kRightHip, JointId::kRightKnee, JointId::kRightAnkle, JointId::kLeftHip,
                          JointId::kLeftKnee, JointId::kLeftAnkle}) {
          ann.skeleton.clear(j);
        }
      }
      out.annotations.push_back(std::move(ann));
    }
    out.images.push_back(std::move(img));
    out.image_names.push_back(name);
  }
  return out;
}

}  // namespace posereg
