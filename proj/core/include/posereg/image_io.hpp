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

#ifndef POSEREG_IMAGE_IO_HPP_
#define POSEREG_IMAGE_IO_HPP_

#include <filesystem>

#include "posereg/geometry.hpp"

namespace posereg {

/// Reads an 8-bit RGB PNG or binary PPM (P6), chosen by file signature.
/// Gray and alpha PNGs are converted to RGB. Throws DataError.
RasterImage read_image(const std::filesystem::path& path);

/// Format chosen by extension: ".ppm" writes P6, anything else PNG.
void write_image(const std::filesystem::path& path, const RasterImage& img);

void write_png(const std::filesystem::path& path, const RasterImage& img);
void write_ppm(const std::filesystem::path& path, const RasterImage& img);

}  // namespace posereg

#endif  // POSEREG_IMAGE_IO_HPP_
