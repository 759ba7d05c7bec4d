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

#include "finedetail/image.h"

#include <fstream>
#include <iterator>
#include <string>

#include "finedetail/error.h"

namespace finedetail {

namespace internal {
void ThrowContract(const char* file, int line, const char* cond,
                   const std::string& msg) {
  std::string where = file;
  auto slash = where.find_last_of('/');
  if (slash != std::string::npos) where = where.substr(slash + 1);
  throw ContractViolation(msg + " [" + cond + " at " + where + ":" +
                          std::to_string(line) + "]");
}
}  // namespace internal

ImageU8::ImageU8(std::size_t width, std::size_t height, std::size_t channels)
    : ImageU8(width, height, channels,
              std::vector<std::uint8_t>(width * height * channels, 0)) {}

ImageU8::ImageU8(std::size_t width, std::size_t height, std::size_t channels,
                 std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels),
      data_(std::move(data)) {
  FD_REQUIRE(width_ >= 1 && height_ >= 1, "image dimensions must be >= 1");
  FD_REQUIRE(channels_ == 1 || channels_ == 3, "channels must be 1 or 3");
  FD_REQUIRE(data_.size() == width_ * height_ * channels_,
             "image data length " + std::to_string(data_.size()) +
                 " != width*height*channels");
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<ImageFormat> DetectFormat(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P',  'N',  'G',
                                              0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return ImageFormat::kPng;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
      bytes[2] == 0xFF) {
    return ImageFormat::kJpeg;
  }
  return std::nullopt;
}

ImageU8 LoadImage(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  std::optional<ImageFormat> format = DetectFormat(bytes);
  if (!format) {
    throw DecodeError(path.string() + ": unrecognized file signature");
  }
  return DecodeImage(bytes, *format);
}

void SavePng(const ImageU8& img, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodePng(img));
}

ImageU8 ToGrayscale(const ImageU8& img) {
  if (img.channels() == 1) return img;
  FD_REQUIRE(img.channels() == 3, "grayscale conversion needs 1 or 3 channels");
  ImageU8 out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  // Integer form of the BT.601 weights. All terms are non-negative, so
  // adding 500 before the division rounds half away from zero exactly.
  for (std::size_t i = 0, n = dst.size(); i < n; ++i) {
    unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) /
                                       1000);
  }
  return out;
}

ImageU8 ToRgb(const ImageU8& img) {
  if (img.channels() == 3) return img;
  ImageU8 out(img.width(), img.height(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  }
  return out;
}

GrayQuantized Quantize(const ImageU8& gray, int levels) {
  FD_REQUIRE(gray.channels() == 1, "quantize expects a 1-channel image");
  FD_REQUIRE(levels >= 2 && levels <= 256, "levels must be in [2, 256]");
  GrayQuantized q;
  q.width = gray.width();
  q.height = gray.height();
  q.levels = levels;
  q.data.resize(gray.data().size());
  std::uint8_t lut[256];
  for (int v = 0; v < 256; ++v) {
    lut[v] = static_cast<std::uint8_t>((v * levels) / 256);
  }
  auto src = gray.data();
  for (std::size_t i = 0; i < src.size(); ++i) q.data[i] = lut[src[i]];
  return q;
}

PatchGrid PartitionPatches(std::size_t width, std::size_t height,
                           std::size_t patch_size) {
  FD_REQUIRE(patch_size >= 1, "patch size must be >= 1");
  if (width < patch_size || height < patch_size) {
    throw UndefinedResult("image " + std::to_string(width) + "x" +
                          std::to_string(height) +
                          " is smaller than one patch of size " +
                          std::to_string(patch_size));
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.rows = height / patch_size;
  grid.cols = width / patch_size;
  grid.origins.reserve(grid.rows * grid.cols);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      grid.origins.push_back({c * patch_size, r * patch_size});
    }
  }
  return grid;
}

TensorF ImageToTensor(const ImageU8& img) {
  TensorF t(img.channels(), img.height(), img.width());
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t y = 0; y < img.height(); ++y) {
      float* row = t.row(c, y);
      for (std::size_t x = 0; x < img.width(); ++x) row[x] = img.at(x, y, c);
    }
  }
  return t;
}

}  // namespace finedetail
