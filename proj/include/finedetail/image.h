// Copyright 2026 The finedetail Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Image decoding, color conversion, gray-level quantization and patch
// partitioning shared by the metric modules.

#ifndef FINEDETAIL_IMAGE_H_
#define FINEDETAIL_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "finedetail/tensor.h"

namespace finedetail {

// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
class ImageU8 {
 public:
  ImageU8() = default;
  ImageU8(std::size_t width, std::size_t height, std::size_t channels);
  ImageU8(std::size_t width, std::size_t height, std::size_t channels,
          std::vector<std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t channels() const { return channels_; }
  std::size_t stride() const { return width_ * channels_; }
  bool empty() const { return data_.empty(); }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  friend bool operator==(const ImageU8&, const ImageU8&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Row-major gray-level indices in [0, levels - 1].
struct GrayQuantized {
  std::size_t width = 0;
  std::size_t height = 0;
  int levels = 64;
  std::vector<std::uint8_t> data;

  std::uint8_t at(std::size_t x, std::size_t y) const {
    return data[y * width + x];
  }
};

struct PatchOrigin {
  std::size_t x = 0;
  std::size_t y = 0;
};

// Non-overlapping grid of full patches anchored at (0, 0). Trailing partial
// rows and columns are not part of the grid.
struct PatchGrid {
  std::size_t patch_size = 64;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PatchOrigin> origins;  // row-major

  std::size_t count() const { return origins.size(); }
};

enum class ImageFormat { kPng, kJpeg };

// Decodes a PNG or JPEG file. PNG palette/low-bit-depth images are expanded,
// 16-bit samples keep their high byte and alpha is dropped. JPEG input is
// decoded to RGB or gray. Throws DecodeError on malformed input.
ImageU8 DecodeImage(std::span<const std::uint8_t> bytes, ImageFormat format);

// Sniffs the signature bytes. Returns nullopt for anything else.
std::optional<ImageFormat> DetectFormat(std::span<const std::uint8_t> bytes);

// Reads and decodes a file, detecting the format from its content.
ImageU8 LoadImage(const std::filesystem::path& path);

// 8-bit, non-interlaced PNG.
std::vector<std::uint8_t> EncodePng(const ImageU8& img);
void SavePng(const ImageU8& img, const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

// BT.601 luma, y = round(0.299 R + 0.587 G + 0.114 B), half away from zero.
// Gray input is returned unchanged.
ImageU8 ToGrayscale(const ImageU8& img);

// Replicates a gray image into three channels; RGB input is returned as is.
ImageU8 ToRgb(const ImageU8& img);

// index = floor(sample * levels / 256). Requires a 1-channel image and
// 2 <= levels <= 256.
GrayQuantized Quantize(const ImageU8& gray, int levels);

// Throws UndefinedResult when the image cannot hold a single patch.
PatchGrid PartitionPatches(std::size_t width, std::size_t height,
                           std::size_t patch_size);

// (channels, height, width) float tensor with the raw 0..255 sample values.
TensorF ImageToTensor(const ImageU8& img);

}  // namespace finedetail

#endif  // FINEDETAIL_IMAGE_H_
