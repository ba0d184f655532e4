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

#include "posereg/dataset.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "posereg/error.hpp"
#include "posereg/parallel.hpp"

namespace posereg {

using nlohmann::json;

namespace {

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

Point2 parse_point(const json& j, std::size_t line_no, const std::string& name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DataError(where(line_no) + "joint '" + name + "' must be [x, y]");
  }
  Point2 p{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw DataError(where(line_no) + "joint '" + name + "' is not finite");
  }
  return p;
}

BBox parse_box(const json& j, std::size_t line_no, const char* what) {
  if (!j.is_array() || j.size() != 4) {
    throw DataError(where(line_no) + what + " must be [x0, y0, x1, y1]");
  }
  BBox b;
  try {
    b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  } catch (const json::exception&) {
    throw DataError(where(line_no) + what + " must contain numbers");
  }
  if (!b.valid()) throw DataError(where(line_no) + what + " is not a valid box");
  return b;
}

json box_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(line, line_no);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
}

}  // namespace

std::string_view origin_name(BoxOrigin o) noexcept {
  return o == BoxOrigin::kDetector ? "detector" : "ground-truth";
}

PersonAnnotation parse_annotation_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where(line_no) + "malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw DataError(where(line_no) + "expected a JSON object");
  PersonAnnotation ann;
  if (!j.contains("image") || !j["image"].is_string()) {
    throw DataError(where(line_no) + "missing string field 'image'");
  }
  ann.image = j["image"].get<std::string>();
  if (!j.contains("joints") || !j["joints"].is_object()) {
    throw DataError(where(line_no) + "missing object field 'joints'");
  }
  std::optional<Point2> neck, head_top;
  for (const auto& [name, value] : j["joints"].items()) {
    if (name == "neck") {
      neck = parse_point(value, line_no, name);
    } else if (name == "head_top") {
      head_top = parse_point(value, line_no, name);
    } else if (auto id = joint_from_name(name)) {
      ann.skeleton.set(*id, parse_point(value, line_no, name));
    } else {
      throw DataError(where(line_no) + "unknown joint name '" + name + "'");
    }
  }
  if (!ann.skeleton.has(JointId::kHead) && neck && head_top) {
    ann.skeleton.set(JointId::kHead, head_from_neck_and_top(*neck, *head_top));
  }
  if (j.contains("gt_box") && !j["gt_box"].is_null()) {
    ann.gt_box = parse_box(j["gt_box"], line_no, "gt_box");
  }
  return ann;
}

std::vector<PersonAnnotation> load_annotations(const std::filesystem::path& path, bool check_images) {
  std::vector<PersonAnnotation> anns;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    PersonAnnotation ann = parse_annotation_line(line, line_no);
    if (check_images && !std::filesystem::exists(resolve_image_path(path, ann.image))) {
      throw DataError(where(line_no) + "image '" + ann.image + "' does not exist");
    }
    anns.push_back(std::move(ann));
  });
  return anns;
}

std::string annotation_to_json(const PersonAnnotation& ann) {
  json joints = json::object();
  for (JointId id : kAllJoints) {
    if (const auto& p = ann.skeleton[id]) joints[std::string(joint_name(id))] = json::array({p->x, p->y});
  }
  json j = {{"image", ann.image}, {"joints", joints}};
  if (ann.gt_box) j["gt_box"] = box_json(*ann.gt_box);
  return j.dump();
}

void write_annotations(const std::filesystem::path& path, const std::vector<PersonAnnotation>& anns) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& a : anns) out << annotation_to_json(a) << '\n';
}

std::vector<FrameDetections> load_detections(const std::filesystem::path& path) {
  std::vector<FrameDetections> frames;
  for_each_line(path, [&](const std::string& line, std::size_t line_no) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where(line_no) + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("image") || !j["image"].is_string()) {
      throw DataError(where(line_no) + "missing string field 'image'");
    }
    FrameDetections f{j["image"].get<std::string>(), {}};
    if (!j.contains("boxes") || !j["boxes"].is_array()) {
      throw DataError(where(line_no) + "missing array field 'boxes'");
    }
    for (const auto& b : j["boxes"]) {
      if (!b.is_object() || !b.contains("box")) throw DataError(where(line_no) + "box entry needs 'box'");
      DetectionBox d{parse_box(b["box"], line_no, "box"), 1.0};
      if (b.contains("score")) {
        if (!b["score"].is_number()) throw DataError(where(line_no) + "score must be a number");
        d.score = b["score"].get<double>();
      }
      if (!(d.score >= 0.0 && d.score <= 1.0)) throw DataError(where(line_no) + "score outside [0, 1]");
      f.boxes.push_back(d);
    }
    frames.push_back(std::move(f));
  });
  return frames;
}

void write_detections(const std::filesystem::path& path, const std::vector<FrameDetections>& frames) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& f : frames) {
    json boxes = json::array();
    for (const auto& d : f.boxes) boxes.push_back({{"box", box_json(d.box)}, {"score", d.score}});
    out << json{{"image", f.image}, {"boxes", boxes}}.dump() << '\n';
  }
}

std::filesystem::path resolve_image_path(const std::filesystem::path& listing, const std::string& image) {
  std::filesystem::path p(image);
  if (p.is_absolute()) return p;
  return listing.parent_path() / p;
}

Point2 head_from_neck_and_top(const Point2& neck, const Point2& head_top) {
  return {(neck.x + head_top.x) / 2, (neck.y + head_top.y) / 2};
}

BBox expanded_gt_box(const PersonAnnotation& ann) {
  if (ann.gt_box) return *ann.gt_box;
  return expand_about_center(tight_box(ann.skeleton), kGroundTruthExpansion);
}

BoxChoice box_choice_for_iou(double best_iou) noexcept {
  if (best_iou > 0.7) return BoxChoice::kDetector;
  if (best_iou < 0.5) return BoxChoice::kGroundTruth;
  return BoxChoice::kBoth;
}

AugmentationPlan choose_boxes(const BBox& gt_expanded, const std::vector<DetectionBox>& detections) {
  AugmentationPlan plan;
  if (detections.empty()) {
    plan.boxes.emplace_back(gt_expanded, BoxOrigin::kGroundTruth);
    return plan;
  }
  std::size_t best = 0;
  double best_iou = -1.0;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const double v = iou(gt_expanded, detections[i].box);
    if (v > best_iou) {
      best_iou = v;
      best = i;
    }
  }
  plan.best_iou = best_iou;
  switch (box_choice_for_iou(best_iou)) {
    case BoxChoice::kDetector:
      plan.boxes.emplace_back(detections[best].box, BoxOrigin::kDetector);
      break;
    case BoxChoice::kGroundTruth:
      plan.boxes.emplace_back(gt_expanded, BoxOrigin::kGroundTruth);
      break;
    case BoxChoice::kBoth:
      plan.boxes.emplace_back(detections[best].box, BoxOrigin::kDetector);
      plan.boxes.emplace_back(gt_expanded, BoxOrigin::kGroundTruth);
      break;
  }
  return plan;
}

Tensor<float> normalize_pixels(const RasterImage& img) {
  Tensor<float> t({static_cast<std::size_t>(img.height()), static_cast<std::size_t>(img.width()),
                   static_cast<std::size_t>(RasterImage::kChannels)});
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = (static_cast<float>(px[i]) - 127.0f) / 128.0f;
  return t;
}

std::pair<PoseVector, PoseVector> targets_and_weights(const Skeleton& sk, const CropSpec& crop) {
  PoseVector target{}, weights{};
  for (JointId id : kAllJoints) {
    if (const auto& p = sk[id]) {
      const Point2 n = to_crop_coords(*p, crop);
      const std::size_t i = index_of(id);
      target[2 * i] = n.x;
      target[2 * i + 1] = n.y;
      weights[2 * i] = weights[2 * i + 1] = 1.0;
    }
  }
  return {target, weights};
}

TrainCrop flip_crop(const TrainCrop& crop) {
  TrainCrop out = crop;
  const std::size_t h = crop.pixels.dim(0), w = crop.pixels.dim(1), c = crop.pixels.dim(2);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t k = 0; k < c; ++k) {
        out.pixels[(y * w + (w - 1 - x)) * c + k] = crop.pixels[(y * w + x) * c + k];
      }
    }
  }
  Skeleton normalized;
  for (JointId id : kAllJoints) {
    const std::size_t i = index_of(id);
    if (crop.weights[2 * i] != 0.0) normalized.set(id, {crop.target[2 * i], crop.target[2 * i + 1]});
  }
  const Skeleton mirrored = hflip_skeleton(normalized, 1.0);
  out.target = mirrored.to_vector();
  out.weights = swap_pose_slots(crop.weights);
  out.provenance.flipped = !crop.provenance.flipped;
  return out;
}

std::vector<TrainCrop> make_crops(const PersonAnnotation& ann, const RasterImage& image,
                                  const std::vector<DetectionBox>& detections, int target_side,
                                  std::size_t sample_id) {
  if (ann.skeleton.empty()) {
    throw InvalidInput("make_crops: sample " + std::to_string(sample_id) + " has no annotated joints");
  }
  const AugmentationPlan plan = choose_boxes(expanded_gt_box(ann), detections);
  std::vector<TrainCrop> crops;
  crops.reserve(2 * plan.boxes.size());
  for (const auto& [box, origin] : plan.boxes) {
    const CropSpec spec = CropSpec::make(squarify(box), target_side);
    TrainCrop crop;
    crop.pixels = normalize_pixels(crop_zero_pad(image, spec.square, target_side));
    std::tie(crop.target, crop.weights) = targets_and_weights(ann.skeleton, spec);
    crop.provenance = {sample_id, origin, false};
    crop.crop = spec;
    TrainCrop flipped = flip_crop(crop);
    crops.push_back(std::move(crop));
    crops.push_back(std::move(flipped));
  }
  return crops;
}

Skeleton target_skeleton(const TrainCrop& crop) {
  Skeleton sk;
  for (JointId j : kAllJoints) {
    const std::size_t i = 2 * index_of(j);
    if (crop.weights[i] != 0.0) sk.set(j, {crop.target[i], crop.target[i + 1]});
  }
  return sk;
}

std::vector<TrainCrop> make_dataset_crops(const std::vector<PersonAnnotation>& anns, const ImageSource& images,
                                          const DetectionSource& detections, int target_side) {
  std::vector<std::vector<TrainCrop>> per_sample(anns.size());
  parallel_for(anns.size(), [&](std::size_t i) {
    per_sample[i] = make_crops(anns[i], images(anns[i]), detections(anns[i]), target_side, i);
  });
  std::vector<TrainCrop> out;
  for (auto& v : per_sample) {
    for (auto& c : v) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace posereg
