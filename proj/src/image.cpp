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

#include "synoe/image.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace synoe {

namespace {

// RAII for the libpng simplified API control structure.
class PngImage {
 public:
  PngImage() {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image_); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;

  png_image* get() { return &image_; }
  png_image* operator->() { return &image_; }

 private:
  png_image image_;
};

Bytes EncodeRaw(const std::uint8_t* data, int width, int height,
                std::uint32_t format) {
  PngImage png;
  png->width = static_cast<png_uint_32>(width);
  png->height = static_cast<png_uint_32>(height);
  png->format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(png.get(), nullptr, &size, 0, data, 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + png->message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(png.get(), out.data(), &size, 0, data, 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + png->message);
  }
  out.resize(size);
  return out;
}

Bytes DecodeRaw(std::span<const std::uint8_t> png_bytes, std::uint32_t format,
                int& width, int& height) {
  PngImage png;
  if (!png_image_begin_read_from_memory(png.get(), png_bytes.data(), png_bytes.size())) {
    throw ParseError(std::string("png decode failed: ") + png->message);
  }
  png->format = format;
  Bytes out(PNG_IMAGE_SIZE(*png.get()));
  if (!png_image_finish_read(png.get(), nullptr, out.data(), 0, nullptr)) {
    throw ParseError(std::string("png decode failed: ") + png->message);
  }
  width = static_cast<int>(png->width);
  height = static_cast<int>(png->height);
  return out;
}

}  // namespace

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c[0];
  pixels[i + 1] = c[1];
  pixels[i + 2] = c[2];
}

void Image::fill_rect(int x0, int y0, int w, int h, Rgb c) {
  const int xa = std::max(0, x0), ya = std::max(0, y0);
  const int xb = std::min(width, x0 + w), yb = std::min(height, y0 + h);
  for (int y = ya; y < yb; ++y) {
    for (int x = xa; x < xb; ++x) set(x, y, c);
  }
}

BinaryMask::BinaryMask(int w, int h, bool value)
    : width(w),
      height(h),
      bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), value ? 1 : 0) {}

PixelRect ToPixelRect(const BBox& box) {
  const int x0 = static_cast<int>(std::floor(box.x));
  const int y0 = static_cast<int>(std::floor(box.y));
  const int x1 = static_cast<int>(std::ceil(box.right()));
  const int y1 = static_cast<int>(std::ceil(box.bottom()));
  return {x0, y0, x1 - x0, y1 - y0};
}

Image Crop(const Image& image, const PixelRect& rect) {
  if (rect.x < 0 || rect.y < 0 || rect.w <= 0 || rect.h <= 0 ||
      rect.x + rect.w > image.width || rect.y + rect.h > image.height) {
    throw std::out_of_range("crop rectangle outside image");
  }
  Image out(rect.w, rect.h);
  const std::size_t row_bytes = static_cast<std::size_t>(rect.w) * 3;
  for (int y = 0; y < rect.h; ++y) {
    const std::size_t src = (static_cast<std::size_t>(rect.y + y) * image.width + rect.x) * 3;
    std::memcpy(&out.pixels[static_cast<std::size_t>(y) * row_bytes], &image.pixels[src],
                row_bytes);
  }
  return out;
}

void Paste(Image& image, const Image& patch, int x, int y) {
  for (int py = 0; py < patch.height; ++py) {
    const int ty = y + py;
    if (ty < 0 || ty >= image.height) continue;
    for (int px = 0; px < patch.width; ++px) {
      const int tx = x + px;
      if (tx < 0 || tx >= image.width) continue;
      image.set(tx, ty, patch.at(px, py));
    }
  }
}

Bytes EncodePng(const Image& image) {
  return EncodeRaw(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB);
}

Image DecodePng(std::span<const std::uint8_t> png) {
  Image out;
  out.pixels = DecodeRaw(png, PNG_FORMAT_RGB, out.width, out.height);
  return out;
}

Bytes EncodeMaskPng(const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.bits.size());
  std::transform(mask.bits.begin(), mask.bits.end(), gray.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  return EncodeRaw(gray.data(), mask.width, mask.height, PNG_FORMAT_GRAY);
}

BinaryMask DecodeMaskPng(std::span<const std::uint8_t> png) {
  BinaryMask mask;
  mask.bits = DecodeRaw(png, PNG_FORMAT_GRAY, mask.width, mask.height);
  for (auto& b : mask.bits) b = b != 0 ? 1 : 0;
  return mask;
}

Bytes ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Image ReadPng(const std::filesystem::path& path) {
  try {
    return DecodePng(ReadFileBytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WritePng(const std::filesystem::path& path, const Image& image) {
  WriteFileBytes(path, EncodePng(image));
}

BinaryMask ReadMaskPng(const std::filesystem::path& path) {
  try {
    return DecodeMaskPng(ReadFileBytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask) {
  WriteFileBytes(path, EncodeMaskPng(mask));
}

std::string Base64Encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes Base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64: length not a multiple of 4");
  Bytes out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ParseError("base64: malformed input");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding; drop them.
  std::size_t len = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace synoe
