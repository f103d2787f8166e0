// Copyright 2026 The SynOE Authors
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

// Raster containers and lossless (PNG) codecs used at the service boundary.

#ifndef SYNOE_IMAGE_HPP_
#define SYNOE_IMAGE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synoe/core_model.hpp"

namespace synoe {

using Bytes = std::vector<std::uint8_t>;
using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit interleaved RGB image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  /// Fills the integer rectangle [x0,x0+w)x[y0,y0+h), clipped to the image.
  void fill_rect(int x0, int y0, int w, int h, Rgb c);

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary raster; nonzero input pixels become 1.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool value);

  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x)] = v ? 1 : 0;
  }
};

/// Integer pixel rectangle, used for crops and pastes.
struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};
PixelRect ToPixelRect(const BBox& box);

Image Crop(const Image& image, const PixelRect& rect);
/// Copies `patch` into `image` with its top-left corner at (x, y).
void Paste(Image& image, const Image& patch, int x, int y);

Bytes EncodePng(const Image& image);
Image DecodePng(std::span<const std::uint8_t> png);
Bytes EncodeMaskPng(const BinaryMask& mask);
BinaryMask DecodeMaskPng(std::span<const std::uint8_t> png);

Image ReadPng(const std::filesystem::path& path);
void WritePng(const std::filesystem::path& path, const Image& image);
BinaryMask ReadMaskPng(const std::filesystem::path& path);
void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask);

Bytes ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> data);

std::string Base64Encode(std::span<const std::uint8_t> data);
/// Throws ParseError on malformed input.
Bytes Base64Decode(std::string_view text);

}  // namespace synoe

#endif  // SYNOE_IMAGE_HPP_
