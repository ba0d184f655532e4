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

// synth, validate and augment.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <set>

#include "commands.hpp"
#include "frames.hpp"
#include "posereg/error.hpp"
#include "posereg/image_io.hpp"
#include "posereg/parallel.hpp"
#include "posereg/synth.hpp"

namespace posereg::cli {

namespace {

namespace fs = std::filesystem;
using Range = std::pair<double, double>;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string range_text(const AngleRange& r) { return ConfigEcho::format(Range{r.min_deg, r.max_deg}); }

class SynthCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("synth", "Render procedural stick-figure frames with joint annotations");
    app->add_option("--preset", preset_, "Base settings: wide or narrow")
        ->check(CLI::IsMember({"wide", "narrow"}))
        ->capture_default_str();
    app->add_option("--seed", seed_, "Random seed")->capture_default_str();
    app->add_option("--out", out_, "Output directory (images/ and annotations.jsonl)")->required();
    count_ = app->add_option("--count", v_.count, "Number of frames")->check(CLI::PositiveNumber);
    width_ = app->add_option("--width", v_.width, "Frame width in pixels")->check(CLI::PositiveNumber);
    height_ = app->add_option("--height", v_.height, "Frame height in pixels")->check(CLI::PositiveNumber);
    people_ = app->add_option("--people", v_.people_per_frame, "People per frame, side by side")
                  ->check(CLI::PositiveNumber);
    format_ = app->add_option("--format", v_.image_format, "Image format: png or ppm")
                  ->check(CLI::IsMember({"png", "ppm"}));
    fig_min_ = app->add_option("--figure-min", v_.figure_height_min, "Smallest figure height (pixels)");
    fig_max_ = app->add_option("--figure-max", v_.figure_height_max, "Largest figure height (pixels)");
    margin_ = app->add_option("--margin", v_.margin, "Minimum joint distance from the border");
    spread_ = app->add_option("--spread", v_.placement_spread, "Placement jitter, 0 (centered) to 1");
    thick_min_ = app->add_option("--thickness-min", v_.thickness_min, "Thinnest limb width (pixels)");
    thick_max_ = app->add_option("--thickness-max", v_.thickness_max, "Thickest limb width (pixels)");
    lean_ = app->add_option("--lean", lean_v_, "Torso lean range in degrees (min max)");
    tilt_ = app->add_option("--head-tilt", tilt_v_, "Head tilt range relative to the torso");
    upper_arm_ = app->add_option("--upper-arm", upper_arm_v_, "Upper-arm angle range, 0 hangs down");
    forearm_ = app->add_option("--forearm", forearm_v_, "Forearm bend range relative to the upper arm");
    thigh_ = app->add_option("--thigh", thigh_v_, "Thigh angle range, 0 hangs down");
    shin_ = app->add_option("--shin", shin_v_, "Shin bend range relative to the thigh");
    background_ = app->add_option("--background", background_v_, "Background style: flat or noise")
                      ->check(CLI::IsMember({"flat", "noise"}));
    noise_ = app->add_option("--noise", v_.noise_amplitude, "Noise amplitude for noise backgrounds");
    jitter_ = app->add_option("--color-jitter", v_.color_jitter, "Per-channel color jitter for the jitter palette");
    saturation_ = app->add_option("--bg-saturation", v_.background_saturation,
                                  "Background color saturation for random palettes, 0 (gray) to 1")
                      ->check(CLI::Range(0.0, 1.0));
    palette_ = app->add_option("--palette", palette_v_, "Colors: random, jitter (around the fixed palette) or fixed")
                   ->check(CLI::IsMember({"random", "jitter", "fixed"}));
    partial_ = app->add_option("--partial", v_.partial_fraction, "Fraction annotated upper body only")
                   ->check(CLI::Range(0.0, 1.0));
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    SynthConfig c = SynthConfig::preset(preset_);
    auto take = [](CLI::Option* o, const auto& v, auto& field) {
      if (o->count() > 0) field = v;
    };
    auto take_range = [](CLI::Option* o, const Range& v, AngleRange& field) {
      if (o->count() > 0) field = {v.first, v.second};
    };
    take(count_, v_.count, c.count);
    take(width_, v_.width, c.width);
    take(height_, v_.height, c.height);
    take(people_, v_.people_per_frame, c.people_per_frame);
    take(format_, v_.image_format, c.image_format);
    take(fig_min_, v_.figure_height_min, c.figure_height_min);
    take(fig_max_, v_.figure_height_max, c.figure_height_max);
    take(margin_, v_.margin, c.margin);
    take(spread_, v_.placement_spread, c.placement_spread);
    take(thick_min_, v_.thickness_min, c.thickness_min);
    take(thick_max_, v_.thickness_max, c.thickness_max);
    take_range(lean_, lean_v_, c.lean);
    take_range(tilt_, tilt_v_, c.head_tilt);
    take_range(upper_arm_, upper_arm_v_, c.upper_arm);
    take_range(forearm_, forearm_v_, c.forearm);
    take_range(thigh_, thigh_v_, c.thigh);
    take_range(shin_, shin_v_, c.shin);
    if (background_->count() > 0) c.background = background_v_ == "flat" ? BackgroundStyle::kFlat : BackgroundStyle::kNoise;
    take(noise_, v_.noise_amplitude, c.noise_amplitude);
    take(jitter_, v_.color_jitter, c.color_jitter);
    take(saturation_, v_.background_saturation, c.background_saturation);
    if (palette_->count() > 0) {
      c.palette = palette_v_ == "random" ? Palette::kRandom : palette_v_ == "jitter" ? Palette::kJitter : Palette::kFixed;
    }
    take(partial_, v_.partial_fraction, c.partial_fraction);

    std::ostringstream echo_text;
    {
      ConfigEcho echo(echo_text, "synth");
      echo("preset", preset_)("seed", seed_)("count", c.count)("width", c.width)("height", c.height);
      echo("people", c.people_per_frame)("format", c.image_format);
      echo("figure-min", c.figure_height_min)("figure-max", c.figure_height_max)("margin", c.margin);
      echo("spread", c.placement_spread)("thickness-min", c.thickness_min)("thickness-max", c.thickness_max);
      echo_text << "lean = " << range_text(c.lean) << "\nhead-tilt = " << range_text(c.head_tilt)
                << "\nupper-arm = " << range_text(c.upper_arm) << "\nforearm = " << range_text(c.forearm)
                << "\nthigh = " << range_text(c.thigh) << "\nshin = " << range_text(c.shin) << '\n';
      echo("background", c.background == BackgroundStyle::kFlat ? "flat" : "noise")("noise", c.noise_amplitude);
      const char* palette = c.palette == Palette::kRandom   ? "random"
                            : c.palette == Palette::kJitter ? "jitter"
                                                            : "fixed";
      echo("palette", palette)("color-jitter", c.color_jitter)("bg-saturation", c.background_saturation);
      echo("partial", c.partial_fraction);
    }
    out << echo_text.str() << std::flush;

    c.validate();
    const SynthResult r = synth_generate(c, seed_);
    const fs::path dir(out_);
    ensure_dir(dir / "images");
    parallel_for(r.images.size(), [&](std::size_t i) { write_image(dir / r.image_names[i], r.images[i]); });
    write_annotations(dir / "annotations.jsonl", r.annotations);
    std::ofstream cfg(dir / "synth.cfg");
    cfg << echo_text.str();
    out << "wrote " << r.images.size() << " frames and " << r.annotations.size() << " annotations to "
        << (dir / "annotations.jsonl").string() << '\n';
    return 0;
  }

 private:
  std::string preset_ = "wide";
  std::uint64_t seed_ = 0;
  std::string out_;
  SynthConfig v_;
  Range lean_v_, tilt_v_, upper_arm_v_, forearm_v_, thigh_v_, shin_v_;
  std::string background_v_, palette_v_;
  CLI::Option *count_{}, *width_{}, *height_{}, *people_{}, *format_{}, *fig_min_{}, *fig_max_{}, *margin_{},
      *spread_{}, *thick_min_{}, *thick_max_{}, *lean_{}, *tilt_{}, *upper_arm_{}, *forearm_{}, *thigh_{}, *shin_{},
      *background_{}, *noise_{}, *jitter_{}, *saturation_{}, *palette_{}, *partial_{};
};

class ValidateCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("validate", "Check annotation (and detection) files and summarize them");
    app->add_option("--annotations", annotations_, "Annotation JSONL")->required();
    app->add_option("--detections", detections_, "Detection JSONL to check against the annotations");
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    {
      ConfigEcho echo(out, "validate");
      echo("annotations", annotations_)("detections", detections_);
    }
    const auto anns = load_annotations(annotations_);
    const FrameStore frames = FrameStore::load(annotations_, anns);
    std::size_t full = 0, partial = 0, outside = 0, with_box = 0;
    std::array<std::size_t, kNumJoints + 1> by_count{};
    for (const auto& a : anns) {
      const RasterImage& img = frames.at(a.image);
      const std::size_t n = a.skeleton.present_count();
      ++by_count[n];
      (n == kNumJoints ? full : partial) += 1;
      if (a.gt_box) ++with_box;
      for (JointId j : kAllJoints) {
        const auto& p = a.skeleton[j];
        if (p && (p->x < 0 || p->y < 0 || p->x > img.width() || p->y > img.height())) ++outside;
      }
      if (n == 0 && !a.gt_box) {
        throw DataError(annotations_ + ": a person in '" + a.image + "' has no joints and no gt_box");
      }
    }
    out << "frames: " << frames.order().size() << "\npeople: " << anns.size() << "\nfully annotated: " << full
        << "\npartially annotated: " << partial << "\nwith gt_box: " << with_box
        << "\njoints outside their frame: " << outside << "\njoints per person:";
    for (std::size_t n = 0; n <= kNumJoints; ++n) {
      if (by_count[n]) out << ' ' << n << 'x' << by_count[n];
    }
    out << '\n';
    if (!detections_.empty()) {
      const auto dets = load_detections(detections_);
      std::set<std::string> listed;
      std::size_t boxes = 0;
      for (const auto& f : dets) {
        listed.insert(f.image);
        boxes += f.boxes.size();
      }
      std::size_t missing = 0;
      for (const auto& name : frames.order()) missing += listed.contains(name) ? 0 : 1;
      out << "detection frames: " << dets.size() << "\ndetection boxes: " << boxes
          << "\nannotated frames without detections: " << missing << '\n';
    }
    out << "ok\n";
    return 0;
  }

 private:
  std::string annotations_, detections_;
};

class AugmentCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("augment", "Dump training crops and their targets for inspection");
    app->add_option("--annotations", annotations_, "Annotation JSONL")->required();
    app->add_option("--detector", detector_, "Boxes competing with ground truth: none, oracle, file, blob")
        ->check(CLI::IsMember({"none", "oracle", "file", "blob"}))
        ->capture_default_str();
    app->add_option("--detections", detections_, "Detection JSONL for --detector file");
    app->add_option("--side", side_, "Crop side in pixels")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--limit", limit_, "Only the first N people (0 = all)")->capture_default_str();
    app->add_option("--out", out_, "Output directory (crops/ and crops.jsonl)")->required();
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    {
      ConfigEcho echo(out, "augment");
      echo("annotations", annotations_)("detector", detector_)("detections", detections_)("side", side_);
      echo("limit", limit_)("out", out_);
    }
    auto anns = load_annotations(annotations_);
    if (limit_ > 0 && anns.size() > limit_) anns.resize(limit_);
    const FrameStore frames = FrameStore::load(annotations_, anns);
    const auto detector = make_detector(detector_, anns, detections_);
    const auto crops = build_crops(anns, frames, detect_all(detector.get(), frames), side_);

    const fs::path dir(out_);
    ensure_dir(dir / "crops");
    std::vector<std::string> names(crops.size());
    parallel_for(crops.size(), [&](std::size_t i) {
      char name[32];
      std::snprintf(name, sizeof(name), "crops/%06zu.png", i);
      names[i] = name;
      const TrainCrop& c = crops[i];
      RasterImage img(side_, side_);
      for (std::size_t k = 0; k < c.pixels.size(); ++k) {
        img.pixels()[k] = static_cast<std::uint8_t>(std::lround(c.pixels[k] * 128.0f + 127.0f));
      }
      write_image(dir / names[i], img);
    });
    std::ofstream listing(dir / "crops.jsonl");
    if (!listing) throw DataError("cannot write '" + (dir / "crops.jsonl").string() + "'");
    for (std::size_t i = 0; i < crops.size(); ++i) {
      const TrainCrop& c = crops[i];
      const BBox& sq = c.crop.square;
      nlohmann::json j = {{"crop", names[i]},
                          {"image", anns[c.provenance.sample].image},
                          {"sample", c.provenance.sample},
                          {"origin", std::string(origin_name(c.provenance.origin))},
                          {"flipped", c.provenance.flipped},
                          {"square", {sq.x_min, sq.y_min, sq.x_max, sq.y_max}},
                          {"target", c.target},
                          {"weights", c.weights}};
      listing << j.dump() << '\n';
    }
    out << "wrote " << crops.size() << " crops for " << anns.size() << " people to " << (dir / "crops.jsonl").string()
        << '\n';
    return 0;
  }

 private:
  std::string annotations_, detections_, out_;
  std::string detector_ = "none";
  int side_ = 64;
  std::size_t limit_ = 0;
};

}  // namespace

std::unique_ptr<Command> make_synth_command() { return std::make_unique<SynthCommand>(); }
std::unique_ptr<Command> make_validate_command() { return std::make_unique<ValidateCommand>(); }
std::unique_ptr<Command> make_augment_command() { return std::make_unique<AugmentCommand>(); }

}  // namespace posereg::cli
