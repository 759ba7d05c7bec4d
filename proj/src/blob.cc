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

#include "finedetail/blob.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "finedetail/error.h"

namespace finedetail {
namespace {

constexpr char kMagic[4] = {'F', 'D', 'B', 'L'};

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> b, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[pos + i]} << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> EncodeBlob(const FlatBlob& blob) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  PutU32(out, static_cast<std::uint32_t>(blob.header.size()));
  for (std::uint32_t h : blob.header) PutU32(out, h);
  PutU32(out, static_cast<std::uint32_t>(blob.values.size()));
  for (float f : blob.values) PutU32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

FlatBlob DecodeBlob(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), kMagic, 4) != 0) {
    throw DecodeError("blob: bad magic");
  }
  FlatBlob blob;
  std::size_t pos = 4;
  const std::uint32_t nh = GetU32(b, pos);
  pos += 4;
  if (b.size() < pos + 4ull * nh + 4) throw DecodeError("blob: truncated header");
  for (std::uint32_t i = 0; i < nh; ++i, pos += 4) blob.header.push_back(GetU32(b, pos));
  const std::uint32_t nv = GetU32(b, pos);
  pos += 4;
  if (b.size() != pos + 4ull * nv) {
    throw DecodeError("blob: payload size " + std::to_string(b.size() - pos) +
                      " does not match value count " + std::to_string(nv));
  }
  blob.values.reserve(nv);
  for (std::uint32_t i = 0; i < nv; ++i, pos += 4) {
    blob.values.push_back(std::bit_cast<float>(GetU32(b, pos)));
  }
  return blob;
}

std::vector<std::uint8_t> SerializeConvSpec(const ConvSpec<float>& spec) {
  spec.Validate();
  FlatBlob blob;
  blob.header = {static_cast<std::uint32_t>(spec.out_channels),
                 static_cast<std::uint32_t>(spec.in_channels),
                 static_cast<std::uint32_t>(spec.kernel_h),
                 static_cast<std::uint32_t>(spec.kernel_w),
                 static_cast<std::uint32_t>(spec.stride.y),
                 static_cast<std::uint32_t>(spec.stride.x),
                 static_cast<std::uint32_t>(spec.dilation.y),
                 static_cast<std::uint32_t>(spec.dilation.x),
                 static_cast<std::uint32_t>(spec.padding.y),
                 static_cast<std::uint32_t>(spec.padding.x)};
  blob.values = spec.weights;
  blob.values.insert(blob.values.end(), spec.bias.begin(), spec.bias.end());
  return EncodeBlob(blob);
}

ConvSpec<float> DeserializeConvSpec(std::span<const std::uint8_t> bytes) {
  const FlatBlob blob = DecodeBlob(bytes);
  if (blob.header.size() != 10) throw DecodeError("conv blob: header must hold 10 fields");
  const auto& h = blob.header;
  ConvSpec<float> spec = ConvSpec<float>::Zeros(h[0], h[1], h[2], h[3]);
  spec.stride = {h[4], h[5]};
  spec.dilation = {h[6], h[7]};
  spec.padding = {h[8], h[9]};
  if (blob.values.size() != spec.weights.size() + spec.bias.size()) {
    throw DecodeError("conv blob: value count does not match dimensions");
  }
  std::copy_n(blob.values.begin(), spec.weights.size(), spec.weights.begin());
  std::copy(blob.values.begin() + static_cast<std::ptrdiff_t>(spec.weights.size()),
            blob.values.end(), spec.bias.begin());
  spec.Validate();
  return spec;
}

}  // namespace finedetail
