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

// Flat binary blob used for conv fixtures and model parameters. All fields
// are little-endian:
//
//   char[4]  magic "FDBL"
//   u32      header_count
//   u32      header[header_count]   (dimensions / hyper-parameters)
//   u32      value_count
//   f32      values[value_count]
//
// A ConvSpec is stored with header (out, in, kh, kw, sy, sx, dy, dx, py, px)
// and values = weights followed by bias.

#ifndef FINEDETAIL_BLOB_H_
#define FINEDETAIL_BLOB_H_

#include <cstdint>
#include <span>
#include <vector>

#include "finedetail/conv.h"

namespace finedetail {

struct FlatBlob {
  std::vector<std::uint32_t> header;
  std::vector<float> values;
  friend bool operator==(const FlatBlob&, const FlatBlob&) = default;
};

std::vector<std::uint8_t> EncodeBlob(const FlatBlob& blob);
// Throws DecodeError on a bad magic or a size mismatch.
FlatBlob DecodeBlob(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> SerializeConvSpec(const ConvSpec<float>& spec);
ConvSpec<float> DeserializeConvSpec(std::span<const std::uint8_t> bytes);

}  // namespace finedetail

#endif  // FINEDETAIL_BLOB_H_
