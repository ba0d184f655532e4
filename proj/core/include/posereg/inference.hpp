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

#ifndef POSEREG_INFERENCE_HPP_
#define POSEREG_INFERENCE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posereg/dataset.hpp"
#include "posereg/network.hpp"

namespace posereg {

/// Normalized pose of one [S, S, 3] crop: the network runs on the crop and
/// its mirror, the mirrored output is un-flipped and the two are averaged.
PoseVector predict_person(const Parameters<float>& params, const Tensor<float>& crop);

/// Batched predictions for many crops. Without flip averaging only the
/// crop itself is evaluated.
std::vector<PoseVector> predict_crops(const Parameters<float>& params, std::span<const TrainCrop> crops,
                                      bool flip_average = true, std::size_t batch = 64);

class PersonDetector {
 public:
  virtual ~PersonDetector() = default;
  virtual std::vector<DetectionBox> detect(const std::string& image, const RasterImage& frame) const = 0;
};

/// Expanded ground-truth boxes of the annotations sharing the image.
class OracleDetector final : public PersonDetector {
 public:
  explicit OracleDetector(const std::vector<PersonAnnotation>& anns);
  std::vector<DetectionBox> detect(const std::string& image, const RasterImage& frame) const override;

 private:
  std::map<std::string, std::vector<DetectionBox>> boxes_;
};

/// Precomputed detections. An image without an entry is a DataError.
class FileDetector final : public PersonDetector {
 public:
  explicit FileDetector(const std::vector<FrameDetections>& frames);
  std::vector<DetectionBox> detect(const std::string& image, const RasterImage& frame) const override;

 private:
  std::map<std::string, std::vector<DetectionBox>> boxes_;
};

struct BlobDetectorConfig {
  int threshold = 40;          // max channel difference from the background
  std::size_t min_area = 40;   // pixels per component
  double expand = 1.2;
};

/// Foreground blobs against a flat background: the background color is the
/// per-channel median of the border pixels, foreground pixels are grouped
/// into 8-connected components and each component's box is expanded.
/// score is the fraction of the tight box covered by the component.
class BlobDetector final : public PersonDetector {
 public:
  explicit BlobDetector(BlobDetectorConfig config = {}) : config_(config) {}
  std::vector<DetectionBox> detect(const std::string& image, const RasterImage& frame) const override;

 private:
  BlobDetectorConfig config_;
};

struct PersonPrediction {
  BBox box;
  double score = 1.0;
  Skeleton skeleton;  // frame coordinates
};

struct FramePrediction {
  std::string image;
  std::vector<PersonPrediction> people;
};

/// One prediction per detection, in detection order.
FramePrediction predict_frame(const Parameters<float>& params, const PersonDetector& detector,
                              const std::string& image, const RasterImage& frame);

/// Prediction JSONL: {"image": ..., "people": [{"box": [...], "score": s, "joints": {...}}]}.
std::string prediction_to_json(const FramePrediction& p);
void write_predictions(const std::filesystem::path& path, const std::vector<FramePrediction>& preds);
/// Also accepts annotation lines (one person each, box from the joints).
std::vector<FramePrediction> load_predictions(const std::filesystem::path& path);

struct DetectorRates {
  std::size_t detections = 0;
  std::size_t false_detections = 0;
  std::size_t ground_truths = 0;
  std::size_t missed = 0;
  double false_positive_rate = 0.0;  // false_detections / detections
  double false_negative_rate = 0.0;  // missed / ground_truths
};

/// Per frame, detections in descending score order are greedily matched to
/// unmatched expanded ground-truth boxes; a match needs IoU strictly above
/// 0.5. Frames without an entry in `detections` have no detections.
DetectorRates detector_eval(const std::vector<FrameDetections>& detections,
                            const std::vector<PersonAnnotation>& ground_truth);

/// Pairs predicted people with annotations for evaluation: per image, GT
/// people are greedily matched to the unused prediction box with the highest
/// IoU (any overlap). Unmatched annotations get an empty skeleton.
std::vector<Skeleton> match_predictions(const std::vector<FramePrediction>& preds,
                                        const std::vector<PersonAnnotation>& ground_truth);

}  // namespace posereg

#endif  // POSEREG_INFERENCE_HPP_
