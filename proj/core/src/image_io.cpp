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

#include "posereg/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "posereg/error.hpp"

namespace posereg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open image '" + path.string() + "': " + std::strerror(errno));
  return f;
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    throw DataError("PNG '" + path.string() + "' has no pixels");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw DataError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

// Next whitespace-delimited PPM header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

RasterImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image '" + path.string() + "'");
  const std::string magic = ppm_token(in);
  if (magic != "P6") throw DataError("'" + path.string() + "' is not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(in));
    h = std::stoi(ppm_token(in));
    maxval = std::stoi(ppm_token(in));
  } catch (const std::exception&) {
    throw DataError("malformed PPM header in '" + path.string() + "'");
  }
  if (w < 1 || h < 1 || maxval != 255) {
    throw DataError("unsupported PPM '" + path.string() + "' (need positive size and maxval 255)");
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw DataError("truncated PPM pixel data in '" + path.string() + "'");
  }
  return RasterImage(w, h, std::move(pixels));
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image '" + path.string() + "'");
  char sig[8] = {};
  probe.read(sig, sizeof(sig));
  if (probe.gcount() >= 2 && sig[0] == 'P' && sig[1] == '6') return read_ppm(path);
  if (probe.gcount() == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(sig), 0, 8) == 0) {
    return read_png(path);
  }
  throw DataError("'" + path.string() + "' is neither PNG nor binary PPM");
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  File f = open_file(path, "wb");
  if (!png_image_write_to_stdio(&image, f.get(), 0, img.pixels().data(), 0, nullptr)) {
    throw DataError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

void write_ppm(const std::filesystem::path& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image '" + path.string() + "'");
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()), static_cast<std::streamsize>(img.pixels().size()));
  if (!out) throw DataError("cannot write image '" + path.string() + "'");
}

void write_image(const std::filesystem::path& path, const RasterImage& img) {
  if (path.extension() == ".ppm") {
    write_ppm(path, img);
  } else {
    write_png(path, img);
  }
}

}  // namespace posereg
