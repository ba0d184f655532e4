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

#include "frames.hpp"

#include <fstream>
#include <sstream>

#include "posereg/error.hpp"
#include "posereg/image_io.hpp"
#include "posereg/parallel.hpp"

namespace posereg::cli {

FrameStore FrameStore::load(const std::filesystem::path& listing, const std::vector<PersonAnnotation>& anns) {
  FrameStore store;
  for (const auto& a : anns) {
    if (!store.images_.contains(a.image)) {
      store.images_.emplace(a.image, RasterImage{});
      store.order_.push_back(a.image);
    }
  }
  parallel_for(store.order_.size(), [&](std::size_t i) {
    const std::string& name = store.order_[i];
    store.images_.at(name) = read_image(resolve_image_path(listing, name));
  });
  return store;
}

FrameStore FrameStore::load_paths(const std::vector<std::string>& paths) {
  FrameStore store;
  for (const auto& p : paths) {
    if (store.images_.contains(p)) continue;
    store.images_.emplace(p, read_image(p));
    store.order_.push_back(p);
  }
  return store;
}

const RasterImage& FrameStore::at(const std::string& image) const {
  const auto it = images_.find(image);
  if (it == images_.end()) throw DataError("image '" + image + "' was not loaded");
  return it->second;
}

std::unique_ptr<PersonDetector> make_detector(const std::string& kind, const std::vector<PersonAnnotation>& anns,
                                              const std::string& detections_path) {
  if (kind == "none") return nullptr;
  if (kind == "oracle") return std::make_unique<OracleDetector>(anns);
  if (kind == "blob") return std::make_unique<BlobDetector>();
  if (kind == "file") {
    if (detections_path.empty()) throw InvalidInput("--detector file needs --detections");
    return std::make_unique<FileDetector>(load_detections(detections_path));
  }
  throw InvalidInput("unknown detector '" + kind + "' (none, oracle, file, blob)");
}

std::map<std::string, std::vector<DetectionBox>> detect_all(const PersonDetector* detector, const FrameStore& frames) {
  const auto& names = frames.order();
  std::vector<std::vector<DetectionBox>> found(names.size());
  if (detector) {
    parallel_for(names.size(), [&](std::size_t i) { found[i] = detector->detect(names[i], frames.at(names[i])); });
  }
  std::map<std::string, std::vector<DetectionBox>> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], std::move(found[i]));
  return out;
}

std::vector<TrainCrop> build_crops(const std::vector<PersonAnnotation>& anns, const FrameStore& frames,
                                   const std::map<std::string, std::vector<DetectionBox>>& detections, int side) {
  return make_dataset_crops(
      anns, [&](const PersonAnnotation& a) -> const RasterImage& { return frames.at(a.image); },
      [&](const PersonAnnotation& a) {
        const auto it = detections.find(a.image);
        return it == detections.end() ? std::vector<DetectionBox>{} : it->second;
      },
      side);
}

std::vector<TrainCrop> build_eval_crops(const std::vector<PersonAnnotation>& anns, const FrameStore& frames,
                                        int side) {
  std::vector<TrainCrop> all = build_crops(anns, frames, {}, side);
  std::vector<TrainCrop> out;
  out.reserve(anns.size());
  for (auto& c : all) {
    if (!c.provenance.flipped) out.push_back(std::move(c));
  }
  return out;
}

NetworkConfig resolve_network(const std::string& preset, const std::string& network_file) {
  if (network_file.empty()) return NetworkConfig::preset(preset);
  std::ifstream in(network_file);
  if (!in) throw DataError("cannot open network file '" + network_file + "'");
  std::stringstream text;
  text << in.rdbuf();
  try {
    return NetworkConfig::parse(text.str());
  } catch (const DataError& e) {
    throw DataError(network_file + ": " + e.what());
  }
}

}  // namespace posereg::cli
