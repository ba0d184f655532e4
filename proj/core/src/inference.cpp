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

#include "posereg/inference.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "posereg/error.hpp"
#include "posereg/parallel.hpp"

namespace posereg {

using nlohmann::json;

namespace {

// Mirrors columns of an [S, S, C] block.
void hflip_into(const float* src, std::size_t side, std::size_t channels, float* dst) {
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const float* s = src + (y * side + x) * channels;
      float* d = dst + (y * side + (side - 1 - x)) * channels;
      std::copy(s, s + channels, d);
    }
  }
}

PoseVector row_of(const Tensor<float>& out, std::size_t b) {
  PoseVector v{};
  for (std::size_t k = 0; k < kPoseDim; ++k) v[k] = out[b * kPoseDim + k];
  return v;
}

PoseVector average_unflipped(const PoseVector& plain, const PoseVector& mirrored) {
  const PoseVector back = hflip_pose(mirrored);
  PoseVector v{};
  for (std::size_t k = 0; k < kPoseDim; ++k) v[k] = 0.5 * (plain[k] + back[k]);
  return v;
}

std::map<std::string, std::vector<DetectionBox>> index_frames(const std::vector<FrameDetections>& frames) {
  std::map<std::string, std::vector<DetectionBox>> m;
  for (const auto& f : frames) {
    auto& v = m[f.image];
    v.insert(v.end(), f.boxes.begin(), f.boxes.end());
  }
  return m;
}

json box_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox box_from_json(const json& j, std::size_t line_no) {
  if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); })) {
    throw DataError("line " + std::to_string(line_no) + ": box must be [x0, y0, x1, y1]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

PoseVector predict_person(const Parameters<float>& params, const Tensor<float>& crop) {
  const Shape in = params.config.input_shape();
  if (crop.shape() != in) {
    throw InvalidInput("predict_person: crop shape " + shape_string(crop.shape()) + " does not match network input " +
                       shape_string(in));
  }
  const std::size_t n = crop.size();
  Tensor<float> batch({2, in[0], in[1], in[2]});
  std::copy(crop.begin(), crop.end(), batch.data());
  hflip_into(crop.data(), in[0], in[2], batch.data() + n);
  const Tensor<float> out = predict(params, batch);
  return average_unflipped(row_of(out, 0), row_of(out, 1));
}

std::vector<PoseVector> predict_crops(const Parameters<float>& params, std::span<const TrainCrop> crops,
                                      bool flip_average, std::size_t batch) {
  const Shape in = params.config.input_shape();
  const std::size_t per = shape_volume(in);
  batch = std::max<std::size_t>(batch, 1);
  const std::size_t chunks = (crops.size() + batch - 1) / batch;
  std::vector<PoseVector> result(crops.size());
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * batch, hi = std::min(crops.size(), lo + batch);
    const std::size_t b = hi - lo;
    Tensor<float> plain({b, in[0], in[1], in[2]});
    Tensor<float> mirrored;
    if (flip_average) mirrored.resize(plain.shape());
    for (std::size_t i = 0; i < b; ++i) {
      const Tensor<float>& px = crops[lo + i].pixels;
      if (px.shape() != in) {
        throw InvalidInput("predict_crops: crop shape " + shape_string(px.shape()) + " does not match network input " +
                           shape_string(in));
      }
      std::copy(px.begin(), px.end(), plain.data() + i * per);
      if (flip_average) hflip_into(px.data(), in[0], in[2], mirrored.data() + i * per);
    }
    const Tensor<float> out = predict(params, plain);
    if (!flip_average) {
      for (std::size_t i = 0; i < b; ++i) result[lo + i] = row_of(out, i);
      return;
    }
    const Tensor<float> out_m = predict(params, mirrored);
    for (std::size_t i = 0; i < b; ++i) result[lo + i] = average_unflipped(row_of(out, i), row_of(out_m, i));
  });
  return result;
}

OracleDetector::OracleDetector(const std::vector<PersonAnnotation>& anns) {
  for (const auto& a : anns) boxes_[a.image].push_back({expanded_gt_box(a), 1.0});
}

std::vector<DetectionBox> OracleDetector::detect(const std::string& image, const RasterImage&) const {
  const auto it = boxes_.find(image);
  return it == boxes_.end() ? std::vector<DetectionBox>{} : it->second;
}

FileDetector::FileDetector(const std::vector<FrameDetections>& frames) : boxes_(index_frames(frames)) {}

std::vector<DetectionBox> FileDetector::detect(const std::string& image, const RasterImage&) const {
  const auto it = boxes_.find(image);
  if (it == boxes_.end()) throw DataError("no detections listed for image '" + image + "'");
  return it->second;
}

std::vector<DetectionBox> BlobDetector::detect(const std::string&, const RasterImage& frame) const {
  const int w = frame.width(), h = frame.height();
  if (w == 0 || h == 0) return {};
  std::array<std::uint8_t, 3> bg{};
  for (int c = 0; c < 3; ++c) {
    std::vector<std::uint8_t> border;
    for (int x = 0; x < w; ++x) {
      border.push_back(frame.at(x, 0, c));
      border.push_back(frame.at(x, h - 1, c));
    }
    for (int y = 1; y + 1 < h; ++y) {
      border.push_back(frame.at(0, y, c));
      border.push_back(frame.at(w - 1, y, c));
    }
    auto mid = border.begin() + static_cast<std::ptrdiff_t>(border.size() / 2);
    std::nth_element(border.begin(), mid, border.end());
    bg[c] = *mid;
  }
  std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int diff = 0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(int{frame.at(x, y, c)} - int{bg[c]}));
      fg[static_cast<std::size_t>(y) * w + x] = diff > config_.threshold;
    }
  }
  std::vector<DetectionBox> out;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (fg[start] != 1) continue;
    fg[start] = 2;
    stack.assign(1, start);
    std::size_t area = 0;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int px = p % w, py = p / w;
      ++area;
      x0 = std::min(x0, px), y0 = std::min(y0, py), x1 = std::max(x1, px), y1 = std::max(y1, py);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int q = ny * w + nx;
          if (fg[q] == 1) {
            fg[q] = 2;
            stack.push_back(q);
          }
        }
      }
    }
    if (area < config_.min_area) continue;
    const BBox tight{double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
    out.push_back({expand_about_center(tight, config_.expand), static_cast<double>(area) / tight.area()});
  }
  return out;
}

FramePrediction predict_frame(const Parameters<float>& params, const PersonDetector& detector,
                              const std::string& image, const RasterImage& frame) {
  const int side = params.config.input_side;
  FramePrediction fp{image, {}};
  for (const DetectionBox& d : detector.detect(image, frame)) {
    const CropSpec crop = CropSpec::make(squarify(d.box), side);
    const PoseVector pose = predict_person(params, normalize_pixels(crop_zero_pad(frame, crop.square, side)));
    PersonPrediction person{d.box, d.score, {}};
    for (JointId j : kAllJoints) {
      const std::size_t i = 2 * index_of(j);
      person.skeleton.set(j, from_crop_coords({pose[i], pose[i + 1]}, crop));
    }
    fp.people.push_back(std::move(person));
  }
  return fp;
}

std::string prediction_to_json(const FramePrediction& p) {
  json people = json::array();
  for (const auto& person : p.people) {
    json joints = json::object();
    for (JointId j : kAllJoints) {
      if (const auto& pt = person.skeleton[j]) joints[std::string(joint_name(j))] = json::array({pt->x, pt->y});
    }
    people.push_back({{"box", box_json(person.box)}, {"score", person.score}, {"joints", joints}});
  }
  return json{{"image", p.image}, {"people", people}}.dump();
}

void write_predictions(const std::filesystem::path& path, const std::vector<FramePrediction>& preds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& p : preds) out << prediction_to_json(p) << '\n';
}

std::vector<FramePrediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<FramePrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("people")) {
        const PersonAnnotation ann = parse_annotation_line(line, line_no);
        out.push_back({ann.image, {{expanded_gt_box(ann), 1.0, ann.skeleton}}});
        continue;
      }
      if (!j["people"].is_array() || !j.contains("image") || !j["image"].is_string()) {
        throw DataError("line " + std::to_string(line_no) + ": expected \"image\" and a \"people\" array");
      }
      FramePrediction fp{j["image"].get<std::string>(), {}};
      for (const json& p : j["people"]) {
        if (!p.is_object() || !p.contains("box") || !p.contains("joints")) {
          throw DataError("line " + std::to_string(line_no) + ": person needs \"box\" and \"joints\"");
        }
        const json as_ann = {{"image", fp.image}, {"joints", p["joints"]}};
        PersonPrediction person{box_from_json(p["box"], line_no), p.value("score", 1.0),
                                parse_annotation_line(as_ann.dump(), line_no).skeleton};
        fp.people.push_back(std::move(person));
      }
      out.push_back(std::move(fp));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return out;
}

DetectorRates detector_eval(const std::vector<FrameDetections>& detections,
                            const std::vector<PersonAnnotation>& ground_truth) {
  std::map<std::string, std::vector<BBox>> gt;
  for (const auto& a : ground_truth) gt[a.image].push_back(expanded_gt_box(a));
  auto dets = index_frames(detections);
  DetectorRates r;
  for (const auto& [image, boxes] : gt) r.ground_truths += boxes.size();
  std::size_t matched_total = 0;
  for (auto& [image, boxes] : dets) {
    r.detections += boxes.size();
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const DetectionBox& a, const DetectionBox& b) { return a.score > b.score; });
    const auto it = gt.find(image);
    if (it == gt.end()) {
      r.false_detections += boxes.size();
      continue;
    }
    std::vector<bool> used(it->second.size(), false);
    for (const auto& d : boxes) {
      std::size_t best = used.size();
      double best_iou = 0.5;
      for (std::size_t g = 0; g < used.size(); ++g) {
        if (used[g]) continue;
        const double o = iou(d.box, it->second[g]);
        if (o > best_iou) best_iou = o, best = g;
      }
      if (best == used.size()) {
        ++r.false_detections;
      } else {
        used[best] = true;
        ++matched_total;
      }
    }
  }
  r.missed = r.ground_truths - matched_total;
  r.false_positive_rate = r.detections ? double(r.false_detections) / r.detections : 0.0;
  r.false_negative_rate = r.ground_truths ? double(r.missed) / r.ground_truths : 0.0;
  return r;
}

std::vector<Skeleton> match_predictions(const std::vector<FramePrediction>& preds,
                                        const std::vector<PersonAnnotation>& ground_truth) {
  std::map<std::string, std::vector<const PersonPrediction*>> by_image;
  for (const auto& f : preds) {
    for (const auto& p : f.people) by_image[f.image].push_back(&p);
  }
  std::map<std::string, std::vector<bool>> used;
  for (const auto& [image, people] : by_image) used[image].assign(people.size(), false);
  std::vector<Skeleton> out(ground_truth.size());
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const auto it = by_image.find(ground_truth[i].image);
    if (it == by_image.end()) continue;
    const BBox gt_box = expanded_gt_box(ground_truth[i]);
    auto& taken = used[it->first];
    std::size_t best = taken.size();
    double best_iou = 0.0;
    for (std::size_t k = 0; k < taken.size(); ++k) {
      if (taken[k]) continue;
      const double o = iou(gt_box, it->second[k]->box);
      if (o > best_iou) best_iou = o, best = k;
    }
    if (best < taken.size()) {
      taken[best] = true;
      out[i] = it->second[best]->skeleton;
    }
  }
  return out;
}

}  // namespace posereg
