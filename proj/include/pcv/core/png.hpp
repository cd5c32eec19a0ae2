// Copyright 2026 The PCV Authors
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

#pragma once

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"

namespace pcv {

// Thin wrappers over libpng's simplified API. Encoding is deterministic for a
// given libpng/zlib build, which the end-to-end determinism checks rely on.

inline std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  require(!img.empty(), ErrorKind::kValidation, "cannot encode empty image");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t len = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> out(len);
  if (!png_image_write_to_memory(&image, out.data(), &len, 0,
                                 img.bytes().data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kIo, "png encode failed: " + msg);
  }
  out.resize(len);
  return out;
}

inline std::vector<std::uint8_t> encode_png(const RgbaImage& img) {
  require(!img.empty(), ErrorKind::kValidation, "cannot encode empty image");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGBA;

  png_alloc_size_t len = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> out(len);
  if (!png_image_write_to_memory(&image, out.data(), &len, 0,
                                 img.bytes().data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kIo, "png encode failed: " + msg);
  }
  out.resize(len);
  return out;
}

// Reads only the header; throws on anything that is not a PNG.
inline Size png_dimensions(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kValidation, "not a valid png: " + msg);
  }
  Size s{static_cast<int>(image.width), static_cast<int>(image.height)};
  png_image_free(&image);
  return s;
}

inline RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kValidation, "not a valid png: " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.bytes().data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kValidation, "png decode failed: " + msg);
  }
  return out;
}

inline void write_file(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorKind::kIo, "short write to " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

template <typename Img>
void write_png(const std::filesystem::path& path, const Img& img) {
  write_file(path, encode_png(img));
}

}  // namespace pcv
