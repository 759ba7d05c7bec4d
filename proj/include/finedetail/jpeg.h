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

// Deterministic baseline sequential JPEG (JFIF) encoder with fixed Annex K
// tables, plus a decoder for the same subset. The encoder output length is
// the denominator of the compression-ratio metric, so the byte stream for a
// given (image, config) must never change between runs of the same build.

#ifndef FINEDETAIL_JPEG_H_
#define FINEDETAIL_JPEG_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "finedetail/image.h"

namespace finedetail::jpeg {

// 64 quantizer values in zig-zag order.
struct QuantTable {
  std::array<std::uint16_t, 64> zigzag{};
  friend bool operator==(const QuantTable&, const QuantTable&) = default;
};

enum class Subsampling { k420, k444 };

struct EncoderConfig {
  int quality = 95;
  Subsampling subsampling = Subsampling::k420;
  int restart_interval = 0;  // in MCUs, 0 = no restart markers
};

// zig-zag position -> natural (row-major) index.
extern const std::array<int, 64> kZigzagToNatural;

// ISO/IEC 10918-1 Annex K.1 tables (zig-zag order).
const QuantTable& LuminanceBaseTable();
const QuantTable& ChrominanceBaseTable();

// IJG quality scaling: scale = q < 50 ? 5000 / q : 200 - 2q;
// entry = clamp((base * scale + 50) / 100, 1, 255).
QuantTable ScaleQuantTable(const QuantTable& base, int quality);

std::vector<std::uint8_t> EncodeBaseline(const ImageU8& img,
                                         const EncoderConfig& cfg = {});

// Decodes baseline Huffman JPEG streams (SOF0/SOF1, 8-bit, 1 or 3
// components, sampling factors 1 or 2). Progressive, lossless, hierarchical
// and arithmetic-coded streams raise UnsupportedFeature; malformed streams,
// including a missing EOI, raise DecodeError.
ImageU8 DecodeBaseline(std::span<const std::uint8_t> bytes);

struct Segment {
  std::uint8_t marker = 0;    // second marker byte, e.g. 0xDB for DQT
  std::size_t offset = 0;     // offset of the 0xFF byte
  std::size_t length = 0;     // value of the length field (0 if none)
  std::size_t entropy_bytes = 0;  // for SOS: scan data following the header
};

// Walks the marker structure and checks that every length field matches the
// bytes actually spanned by its segment, that the stream starts with SOI and
// ends with EOI and that entropy-coded data contains only stuffed 0xFF bytes
// or RST markers. Throws DecodeError describing the first violation.
std::vector<Segment> ValidateStructure(std::span<const std::uint8_t> bytes);

}  // namespace finedetail::jpeg

#endif  // FINEDETAIL_JPEG_H_
