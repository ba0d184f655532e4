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

#ifndef POSEREG_TOOLS_FRAMES_HPP_
#define POSEREG_TOOLS_FRAMES_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "posereg/dataset.hpp"
#include "posereg/inference.hpp"
#include "posereg/network.hpp"

namespace posereg::cli {

/// Decoded frames keyed by the image reference used in the listing.
class FrameStore {
 public:
  /// Loads every distinct image referenced by anns, resolved against the
  /// listing's directory.
  static FrameStore load(const std::filesystem::path& listing, const std::vector<PersonAnnotation>& anns);
  /// Loads the given paths as-is (keys are the strings passed).
  static FrameStore load_paths(const std::vector<std::string>& paths);

  const RasterImage& at(const std::string& image) const;
  const std::vector<std::string>& order() const { return order_; }

 private:
  std::map<std::string, RasterImage> images_;
  std::vector<std::string> order_;
};

/// none | oracle | file | blob. "file" needs detections_path, "oracle"
/// needs annotations. Returns nullptr for "none".
std::unique_ptr<PersonDetector> make_detector(const std::string& kind, const std::vector<PersonAnnotation>& anns,
                                              const std::string& detections_path);

/// Detector output for every stored frame (empty lists without a detector).
std::map<std::string, std::vector<DetectionBox>> detect_all(const PersonDetector* detector, const FrameStore& frames);

/// Training crops for all annotations (make_crops per person).
std::vector<TrainCrop> build_crops(const std::vector<PersonAnnotation>& anns, const FrameStore& frames,
                                   const std::map<std::string, std::vector<DetectionBox>>& detections, int side);

/// Ground-truth-box crops without mirrors, for validation metrics.
std::vector<TrainCrop> build_eval_crops(const std::vector<PersonAnnotation>& anns, const FrameStore& frames, int side);

/// A named preset, or the layer file when one is given.
NetworkConfig resolve_network(const std::string& preset, const std::string& network_file);

}  // namespace posereg::cli

#endif  // POSEREG_TOOLS_FRAMES_HPP_
