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

#ifndef FINEDETAIL_SRC_JPEG_INTERNAL_H_
#define FINEDETAIL_SRC_JPEG_INTERNAL_H_

#include <array>
#include <cstdint>
#include <vector>

namespace finedetail::jpeg::internal {

inline constexpr std::uint8_t kSOI = 0xD8;
inline constexpr std::uint8_t kEOI = 0xD9;
inline constexpr std::uint8_t kSOS = 0xDA;
inline constexpr std::uint8_t kDQT = 0xDB;
inline constexpr std::uint8_t kDRI = 0xDD;
inline constexpr std::uint8_t kDHT = 0xC4;
inline constexpr std::uint8_t kDAC = 0xCC;
inline constexpr std::uint8_t kSOF0 = 0xC0;
inline constexpr std::uint8_t kAPP0 = 0xE0;
inline constexpr std::uint8_t kRST0 = 0xD0;

// BITS (count of codes per length 1..16) and HUFFVAL as in a DHT segment.
struct HuffmanSpec {
  std::array<std::uint8_t, 16> bits;
  std::vector<std::uint8_t> values;
};

struct HuffmanCodes {
  std::array<std::uint16_t, 256> code{};
  std::array<std::uint8_t, 256> size{};  // 0 = symbol not in table
};

const HuffmanSpec& StandardDcLuma();
const HuffmanSpec& StandardDcChroma();
const HuffmanSpec& StandardAcLuma();
const HuffmanSpec& StandardAcChroma();

HuffmanCodes BuildCodes(const HuffmanSpec& spec);

// 8x8 separable DCT-II / DCT-III in double precision, row-major blocks.
void ForwardDct(const double* in, double* out);
void InverseDct(const double* in, double* out);

}  // namespace finedetail::jpeg::internal

#endif  // FINEDETAIL_SRC_JPEG_INTERNAL_H_
