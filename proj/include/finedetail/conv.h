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

// Reference 2D convolution and the two layer-level rewrites used to run a
// VAE at twice its native downsampling factor without retraining:
//
//  * DilateFirstConv: a conv with dilation 2, doubled padding and doubled
//    stride on a 2x nearest-upsampled input reproduces the original conv on
//    the original input exactly. Read the other way round, running the
//    dilated conv on a full-resolution input behaves like the original conv
//    on a half-resolution one.
//
//  * PartitionedUpsampleConv: upsample(x, 2) followed by a stride-1 conv,
//    evaluated tile by tile. Each tile reads its interior plus a halo,
//    upsamples only that window and writes a disjoint block of the output,
//    so peak scratch memory depends on the tile size, not the input size.
//
// All kernels are cross-correlations (no flip) with zero padding and double
// precision accumulation.

#ifndef FINEDETAIL_CONV_H_
#define FINEDETAIL_CONV_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "finedetail/tensor.h"

namespace finedetail {

// Per-axis pair, (y, x).
struct Pair2 {
  std::size_t y = 1;
  std::size_t x = 1;
  friend bool operator==(const Pair2&, const Pair2&) = default;
};

template <typename T>
struct ConvSpec {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::vector<T> weights;  // (out, in, kh, kw)
  std::vector<T> bias;     // (out)
  Pair2 stride{1, 1};
  Pair2 dilation{1, 1};
  Pair2 padding{0, 0};

  static ConvSpec Zeros(std::size_t out, std::size_t in, std::size_t kh,
                        std::size_t kw);

  T& weight(std::size_t o, std::size_t c, std::size_t ky, std::size_t kx) {
    return weights[((o * in_channels + c) * kernel_h + ky) * kernel_w + kx];
  }
  T weight(std::size_t o, std::size_t c, std::size_t ky,
           std::size_t kx) const {
    return weights[((o * in_channels + c) * kernel_h + ky) * kernel_w + kx];
  }

  void Validate() const;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// floor((in + 2p - d(k - 1) - 1) / s) + 1; may be <= 0 for inputs that are
// too small.
std::ptrdiff_t ConvOutputSize(std::size_t in, std::size_t kernel,
                              std::size_t stride, std::size_t dilation,
                              std::size_t padding);

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const ConvSpec<T>& spec);

template <typename T>
Tensor<T> Upsample2xNearest(const Tensor<T>& x);

// Returns the spec with dilation `rate` and padding multiplied by `rate`;
// weights, bias and stride are unchanged. The caller scales the stride by
// the same factor when applying it to an upsampled input.
template <typename T>
ConvSpec<T> DilateFirstConv(const ConvSpec<T>& spec, std::size_t rate = 2);

// Interior tile on the input grid.
struct Tile {
  std::size_t y0 = 0, x0 = 0;
  std::size_t height = 0, width = 0;
};

struct TilePlan {
  std::size_t input_h = 0, input_w = 0;
  std::size_t tile_h = 0, tile_w = 0;
  // Extra samples each tile reads per side, measured on the upsampled grid:
  // ceil(dilation * (kernel - 1) / 2).
  Pair2 halo{0, 0};
  std::vector<Tile> tiles;  // row-major

  // The same halo expressed in input pixels.
  std::size_t input_halo_y() const { return (halo.y + 1) / 2; }
  std::size_t input_halo_x() const { return (halo.x + 1) / 2; }
};

template <typename T>
TilePlan PlanTiles(std::size_t input_h, std::size_t input_w,
                   const ConvSpec<T>& spec, std::size_t target_tile);

struct ScratchStats {
  std::size_t peak_bytes = 0;  // largest per-tile scratch footprint
  std::size_t tiles = 0;
};

struct PartitionOptions {
  int jobs = 1;                     // tiles processed concurrently
  ScratchStats* stats = nullptr;    // optional instrumentation
};

// Equals Conv2d(Upsample2xNearest(x), spec) for stride-1 specs.
template <typename T>
Tensor<T> PartitionedUpsampleConv(const Tensor<T>& x, const ConvSpec<T>& spec,
                                  const TilePlan& plan,
                                  const PartitionOptions& options = {});

}  // namespace finedetail

#endif  // FINEDETAIL_CONV_H_
