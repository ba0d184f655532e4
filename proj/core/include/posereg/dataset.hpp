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

#ifndef POSEREG_DATASET_HPP_
#define POSEREG_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posereg/geometry.hpp"
#include "posereg/skeleton.hpp"
#include "posereg/tensor.hpp"

namespace posereg {

/// Expansion applied to the tight joint box to get the ground-truth person box.
inline constexpr double kGroundTruthExpansion = 1.2;

struct PersonAnnotation {
  std::string image;  // as written in the listing; see resolve_image_path
  Skeleton skeleton;
  /// Dataset-supplied person box. When present it is used as the expanded
  /// ground-truth box instead of the 1.2x tight joint box.
  std::optional<BBox> gt_box;
};

struct DetectionBox {
  BBox box;
  double score = 1.0;
};

struct FrameDetections {
  std::string image;
  std::vector<DetectionBox> boxes;
};

enum class BoxOrigin { kDetector, kGroundTruth };
std::string_view origin_name(BoxOrigin o) noexcept;

struct TrainCrop {
  struct Provenance {
    std::size_t sample = 0;
    BoxOrigin origin = BoxOrigin::kGroundTruth;
    bool flipped = false;
  };

  Tensor<float> pixels;  // [side, side, 3], values in [-1, 1]
  PoseVector target{};   // normalized joints; 0 in absent slots
  PoseVector weights{};  // 1 where the joint is annotated, else 0
  Provenance provenance;
  CropSpec crop;         // frame region the crop was sampled from
};

struct AugmentationPlan {
  std::vector<std::pair<BBox, BoxOrigin>> boxes;  // one or two entries
  std::optional<double> best_iou;                 // none without detections
};

/// Which boxes the overlap of the best detection selects:
///   iou > 0.7 -> detector, iou < 0.5 -> ground truth, otherwise both
/// (0.5 and 0.7 themselves select both).
enum class BoxChoice { kDetector, kGroundTruth, kBoth };
BoxChoice box_choice_for_iou(double best_iou) noexcept;

/// Reads annotation JSONL (one person per line):
///   {"image": "a.png", "joints": {"head": [x, y], "l_wrist": [x, y], ...},
///    "gt_box": [x0, y0, x1, y1]}
/// Absent joints are omitted. "neck" plus "head_top" may stand in for
/// "head" (their midpoint is used). Throws DataError naming the line.
/// With check_images set, every referenced image must exist.
std::vector<PersonAnnotation> load_annotations(const std::filesystem::path& path, bool check_images = true);
PersonAnnotation parse_annotation_line(const std::string& line, std::size_t line_no);
std::string annotation_to_json(const PersonAnnotation& ann);
void write_annotations(const std::filesystem::path& path, const std::vector<PersonAnnotation>& anns);

/// Reads detection JSONL: {"image": "a.png", "boxes": [{"box": [...], "score": s}]}.
std::vector<FrameDetections> load_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const std::vector<FrameDetections>& frames);

/// Relative image references resolve against the listing file's directory.
std::filesystem::path resolve_image_path(const std::filesystem::path& listing, const std::string& image);

/// Midpoint of neck and head top, used as the single head point.
Point2 head_from_neck_and_top(const Point2& neck, const Point2& head_top);

/// The annotation's gt_box, or the tight joint box expanded by 1.2.
BBox expanded_gt_box(const PersonAnnotation& ann);

AugmentationPlan choose_boxes(const BBox& gt_expanded, const std::vector<DetectionBox>& detections);

/// v -> (v - 127) / 128 per component; result is [H, W, 3].
Tensor<float> normalize_pixels(const RasterImage& img);

/// Present joints go to their canonical slots in crop-normalized coordinates
/// with weight 1; absent joints get target 0 and weight 0.
std::pair<PoseVector, PoseVector> targets_and_weights(const Skeleton& sk, const CropSpec& crop);

/// Two or four crops: each box chosen by choose_boxes is squarified,
/// sampled with zero padding at target_side, normalized, and emitted
/// together with its horizontal mirror.
std::vector<TrainCrop> make_crops(const PersonAnnotation& ann, const RasterImage& image,
                                  const std::vector<DetectionBox>& detections, int target_side,
                                  std::size_t sample_id = 0);

/// Mirror of a crop: pixels flipped, targets mirrored with labels swapped.
TrainCrop flip_crop(const TrainCrop& crop);

/// Normalized ground truth of a crop: joints with non-zero weight.
Skeleton target_skeleton(const TrainCrop& crop);

/// Frame pixels for an annotation's image reference.
using ImageSource = std::function<const RasterImage&(const PersonAnnotation&)>;
/// Detector boxes for an annotation's frame (may be empty).
using DetectionSource = std::function<std::vector<DetectionBox>(const PersonAnnotation&)>;

/// make_crops over a whole annotation list, in parallel; output order
/// follows the annotation order. sample ids are annotation indices.
std::vector<TrainCrop> make_dataset_crops(const std::vector<PersonAnnotation>& anns, const ImageSource& images,
                                          const DetectionSource& detections, int target_side);

}  // namespace posereg

#endif  // POSEREG_DATASET_HPP_
