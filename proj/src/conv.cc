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

#include "finedetail/conv.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "finedetail/error.h"

namespace finedetail {

template <typename T>
ConvSpec<T> ConvSpec<T>::Zeros(std::size_t out, std::size_t in, std::size_t kh,
                               std::size_t kw) {
  ConvSpec s;
  s.out_channels = out;
  s.in_channels = in;
  s.kernel_h = kh;
  s.kernel_w = kw;
  s.weights.assign(out * in * kh * kw, T(0));
  s.bias.assign(out, T(0));
  return s;
}

template <typename T>
void ConvSpec<T>::Validate() const {
  FD_REQUIRE(out_channels >= 1 && in_channels >= 1, "channel counts must be >= 1");
  FD_REQUIRE(kernel_h >= 1 && kernel_w >= 1, "kernel dims must be >= 1");
  FD_REQUIRE(weights.size() == out_channels * in_channels * kernel_h * kernel_w,
             "weight count does not match (out, in, kh, kw)");
  FD_REQUIRE(bias.size() == out_channels, "bias count does not match out");
  FD_REQUIRE(stride.y >= 1 && stride.x >= 1, "stride must be >= 1");
  FD_REQUIRE(dilation.y >= 1 && dilation.x >= 1, "dilation must be >= 1");
}

std::ptrdiff_t ConvOutputSize(std::size_t in, std::size_t kernel,
                              std::size_t stride, std::size_t dilation,
                              std::size_t padding) {
  const std::ptrdiff_t span =
      static_cast<std::ptrdiff_t>(in + 2 * padding) -
      static_cast<std::ptrdiff_t>(dilation * (kernel - 1)) - 1;
  if (span < 0) return 0;
  return span / static_cast<std::ptrdiff_t>(stride) + 1;
}

namespace {

// out[o][oy0 + r][ox0 + s] for r < rows, s < cols, reading
// src[c][base_y + r * sy + ky * dy][base_x + s * sx + kx * dx] with zero
// outside src. Accumulation order (c, ky, kx) is fixed so that every caller
// produces identical sums for identical taps.
template <typename T>
void ConvBlock(const Tensor<T>& src, const ConvSpec<T>& spec,
               std::ptrdiff_t base_y, std::ptrdiff_t base_x, std::size_t rows,
               std::size_t cols, Tensor<T>* out, std::size_t oy0,
               std::size_t ox0) {
  const auto H = static_cast<std::ptrdiff_t>(src.height());
  const auto W = static_cast<std::ptrdiff_t>(src.width());
  const auto sy = static_cast<std::ptrdiff_t>(spec.stride.y);
  const auto sx = static_cast<std::ptrdiff_t>(spec.stride.x);
  const auto dy = static_cast<std::ptrdiff_t>(spec.dilation.y);
  const auto dx = static_cast<std::ptrdiff_t>(spec.dilation.x);
  std::vector<double> acc(cols);
  for (std::size_t o = 0; o < spec.out_channels; ++o) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::fill(acc.begin(), acc.end(), static_cast<double>(spec.bias[o]));
      const std::ptrdiff_t iy0 = base_y + static_cast<std::ptrdiff_t>(r) * sy;
      for (std::size_t c = 0; c < spec.in_channels; ++c) {
        for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
          const std::ptrdiff_t iy = iy0 + static_cast<std::ptrdiff_t>(ky) * dy;
          if (iy < 0 || iy >= H) continue;
          const T* row = src.row(c, static_cast<std::size_t>(iy));
          for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
            const double w = spec.weight(o, c, ky, kx);
            const std::ptrdiff_t off =
                base_x + static_cast<std::ptrdiff_t>(kx) * dx;
            for (std::size_t s = 0; s < cols; ++s) {
              const std::ptrdiff_t ix = off + static_cast<std::ptrdiff_t>(s) * sx;
              if (ix < 0 || ix >= W) continue;
              acc[s] += w * static_cast<double>(row[ix]);
            }
          }
        }
      }
      T* dst = out->row(o, oy0 + r) + ox0;
      for (std::size_t s = 0; s < cols; ++s) dst[s] = static_cast<T>(acc[s]);
    }
  }
}

std::ptrdiff_t FloorDiv2(std::ptrdiff_t v) {
  return v >= 0 ? v / 2 : -((-v + 1) / 2);
}

}  // namespace

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const ConvSpec<T>& spec) {
  spec.Validate();
  FD_REQUIRE(x.channels() == spec.in_channels,
             "input has " + std::to_string(x.channels()) +
                 " channels, conv expects " + std::to_string(spec.in_channels));
  const std::ptrdiff_t oh = ConvOutputSize(x.height(), spec.kernel_h,
                                           spec.stride.y, spec.dilation.y,
                                           spec.padding.y);
  const std::ptrdiff_t ow = ConvOutputSize(x.width(), spec.kernel_w,
                                           spec.stride.x, spec.dilation.x,
                                           spec.padding.x);
  FD_REQUIRE(oh >= 1 && ow >= 1, "conv output would be empty for input " +
                                     ToString(x.shape()));
  Tensor<T> out(spec.out_channels, static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow));
  ConvBlock(x, spec, -static_cast<std::ptrdiff_t>(spec.padding.y),
            -static_cast<std::ptrdiff_t>(spec.padding.x),
            static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), &out, 0,
            0);
  return out;
}

template <typename T>
Tensor<T> Upsample2xNearest(const Tensor<T>& x) {
  Tensor<T> out(x.channels(), x.height() * 2, x.width() * 2);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t y = 0; y < out.height(); ++y) {
      const T* src = x.row(c, y / 2);
      T* dst = out.row(c, y);
      for (std::size_t xx = 0; xx < out.width(); ++xx) dst[xx] = src[xx / 2];
    }
  }
  return out;
}

template <typename T>
ConvSpec<T> DilateFirstConv(const ConvSpec<T>& spec, std::size_t rate) {
  spec.Validate();
  FD_REQUIRE(spec.dilation == (Pair2{1, 1}),
             "first-conv dilation expects an undilated spec");
  FD_REQUIRE(rate >= 1, "dilation rate must be >= 1");
  ConvSpec<T> out = spec;
  out.dilation = {rate, rate};
  out.padding = {spec.padding.y * rate, spec.padding.x * rate};
  return out;
}

template <typename T>
TilePlan PlanTiles(std::size_t input_h, std::size_t input_w,
                   const ConvSpec<T>& spec, std::size_t target_tile) {
  FD_REQUIRE(target_tile >= 1, "target tile must be >= 1");
  FD_REQUIRE(input_h >= 1 && input_w >= 1, "empty input");
  TilePlan plan;
  plan.input_h = input_h;
  plan.input_w = input_w;
  plan.tile_h = std::min(target_tile, input_h);
  plan.tile_w = std::min(target_tile, input_w);
  plan.halo = {(spec.dilation.y * (spec.kernel_h - 1) + 1) / 2,
               (spec.dilation.x * (spec.kernel_w - 1) + 1) / 2};
  for (std::size_t y = 0; y < input_h; y += plan.tile_h) {
    for (std::size_t x = 0; x < input_w; x += plan.tile_w) {
      plan.tiles.push_back({y, x, std::min(plan.tile_h, input_h - y),
                            std::min(plan.tile_w, input_w - x)});
    }
  }
  return plan;
}

namespace {

// Output index range [begin, end) owned by the input interval [lo, hi) along
// one axis. Output index o is anchored at upsampled position
// o - pad + center; the anchor's input pixel (clamped to the image) decides
// ownership, which partitions the output exactly.
struct AxisSpan {
  std::ptrdiff_t begin, end;
};

AxisSpan OwnedOutput(std::size_t lo, std::size_t hi, std::size_t in,
                     std::ptrdiff_t out_size, std::size_t pad,
                     std::size_t extent) {
  const auto center = static_cast<std::ptrdiff_t>(extent / 2);
  const auto p = static_cast<std::ptrdiff_t>(pad);
  std::ptrdiff_t b = 2 * static_cast<std::ptrdiff_t>(lo) + p - center;
  std::ptrdiff_t e = 2 * static_cast<std::ptrdiff_t>(hi) + p - center;
  if (lo == 0) b = 0;
  if (hi == in) e = out_size;
  return {std::clamp<std::ptrdiff_t>(b, 0, out_size),
          std::clamp<std::ptrdiff_t>(e, 0, out_size)};
}

}  // namespace

template <typename T>
Tensor<T> PartitionedUpsampleConv(const Tensor<T>& x, const ConvSpec<T>& spec,
                                  const TilePlan& plan,
                                  const PartitionOptions& options) {
  spec.Validate();
  if (spec.stride != (Pair2{1, 1})) {
    throw ContractViolation("partitioned upsample-conv supports stride 1 only");
  }
  FD_REQUIRE(x.channels() == spec.in_channels, "input channel mismatch");
  FD_REQUIRE(plan.input_h == x.height() && plan.input_w == x.width(),
             "tile plan was made for a different input size");
  const std::size_t ext_y = spec.dilation.y * (spec.kernel_h - 1);
  const std::size_t ext_x = spec.dilation.x * (spec.kernel_w - 1);
  if (plan.halo.y < (ext_y + 1) / 2 || plan.halo.x < (ext_x + 1) / 2) {
    throw ContractViolation(
        "tile halo is too small for the kernel footprint (need " +
        std::to_string((ext_y + 1) / 2) + "x" + std::to_string((ext_x + 1) / 2) +
        " on the upsampled grid)");
  }

  const std::size_t H = x.height(), W = x.width();
  const std::ptrdiff_t oh =
      ConvOutputSize(2 * H, spec.kernel_h, 1, spec.dilation.y, spec.padding.y);
  const std::ptrdiff_t ow =
      ConvOutputSize(2 * W, spec.kernel_w, 1, spec.dilation.x, spec.padding.x);
  FD_REQUIRE(oh >= 1 && ow >= 1, "conv output would be empty");

  // Coverage: every input pixel in exactly one tile.
  {
    std::vector<std::uint8_t> hit(H * W, 0);
    for (const Tile& t : plan.tiles) {
      FD_REQUIRE(t.y0 + t.height <= H && t.x0 + t.width <= W && t.height > 0 &&
                     t.width > 0,
                 "tile outside the input");
      for (std::size_t y = t.y0; y < t.y0 + t.height; ++y) {
        for (std::size_t xx = t.x0; xx < t.x0 + t.width; ++xx) {
          FD_REQUIRE(hit[y * W + xx]++ == 0, "tiles overlap");
        }
      }
    }
    FD_REQUIRE(std::all_of(hit.begin(), hit.end(), [](auto v) { return v == 1; }),
               "tiles do not cover the input");
  }

  Tensor<T> out(spec.out_channels, static_cast<std::size_t>(oh),
                static_cast<std::size_t>(ow));
  const std::size_t hin_y = plan.input_halo_y(), hin_x = plan.input_halo_x();
  std::mutex stats_mu;

  auto run_tile = [&](const Tile& t) {
    const AxisSpan ys = OwnedOutput(t.y0, t.y0 + t.height, H, oh,
                                    spec.padding.y, ext_y);
    const AxisSpan xs = OwnedOutput(t.x0, t.x0 + t.width, W, ow,
                                    spec.padding.x, ext_x);
    if (ys.begin >= ys.end || xs.begin >= xs.end) return;
    // Upsampled rows/cols read by the owned outputs.
    const std::ptrdiff_t u0 = ys.begin - static_cast<std::ptrdiff_t>(spec.padding.y);
    const std::ptrdiff_t u1 = ys.end - 1 - static_cast<std::ptrdiff_t>(spec.padding.y) +
                              static_cast<std::ptrdiff_t>(ext_y);
    const std::ptrdiff_t v0 = xs.begin - static_cast<std::ptrdiff_t>(spec.padding.x);
    const std::ptrdiff_t v1 = xs.end - 1 - static_cast<std::ptrdiff_t>(spec.padding.x) +
                              static_cast<std::ptrdiff_t>(ext_x);
    const std::ptrdiff_t i0 = FloorDiv2(u0), i1 = FloorDiv2(u1);
    const std::ptrdiff_t j0 = FloorDiv2(v0), j1 = FloorDiv2(v1);
    // In-image part of the read window must stay within tile + halo.
    const auto lo_y = static_cast<std::ptrdiff_t>(t.y0) - static_cast<std::ptrdiff_t>(hin_y);
    const auto hi_y = static_cast<std::ptrdiff_t>(t.y0 + t.height + hin_y);
    const auto lo_x = static_cast<std::ptrdiff_t>(t.x0) - static_cast<std::ptrdiff_t>(hin_x);
    const auto hi_x = static_cast<std::ptrdiff_t>(t.x0 + t.width + hin_x);
    if (std::max<std::ptrdiff_t>(i0, 0) < lo_y ||
        std::min<std::ptrdiff_t>(i1 + 1, H) > hi_y ||
        std::max<std::ptrdiff_t>(j0, 0) < lo_x ||
        std::min<std::ptrdiff_t>(j1 + 1, W) > hi_x) {
      throw ContractViolation("tile read window exceeds tile plus halo");
    }

    // Tile plus halo, zeros outside the image.
    const auto wh = static_cast<std::size_t>(i1 - i0 + 1);
    const auto ww = static_cast<std::size_t>(j1 - j0 + 1);
    Tensor<T> window(x.channels(), wh, ww);
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t r = 0; r < wh; ++r) {
        const std::ptrdiff_t iy = i0 + static_cast<std::ptrdiff_t>(r);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
        const T* src = x.row(c, static_cast<std::size_t>(iy));
        T* dst = window.row(c, r);
        for (std::size_t s = 0; s < ww; ++s) {
          const std::ptrdiff_t ix = j0 + static_cast<std::ptrdiff_t>(s);
          if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(W)) dst[s] = src[ix];
        }
      }
    }
    const Tensor<T> up = Upsample2xNearest(window);
    ConvSpec<T> local = spec;
    local.padding = {0, 0};
    ConvBlock(up, local, u0 - 2 * i0, v0 - 2 * j0,
              static_cast<std::size_t>(ys.end - ys.begin),
              static_cast<std::size_t>(xs.end - xs.begin), &out,
              static_cast<std::size_t>(ys.begin),
              static_cast<std::size_t>(xs.begin));

    if (options.stats != nullptr) {
      const std::size_t bytes = (window.size() + up.size()) * sizeof(T);
      std::lock_guard<std::mutex> lock(stats_mu);
      options.stats->peak_bytes = std::max(options.stats->peak_bytes, bytes);
      ++options.stats->tiles;
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || plan.tiles.size() < 2) {
    for (const Tile& t : plan.tiles) run_tile(t);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> workers;
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < plan.tiles.size(); i = next++) {
          try {
            run_tile(plan.tiles[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

#define FD_INSTANTIATE_CONV(T)                                                 \
  template struct ConvSpec<T>;                                                 \
  template Tensor<T> Conv2d<T>(const Tensor<T>&, const ConvSpec<T>&);          \
  template Tensor<T> Upsample2xNearest<T>(const Tensor<T>&);                   \
  template ConvSpec<T> DilateFirstConv<T>(const ConvSpec<T>&, std::size_t);    \
  template TilePlan PlanTiles<T>(std::size_t, std::size_t, const ConvSpec<T>&, \
                                 std::size_t);                                 \
  template Tensor<T> PartitionedUpsampleConv<T>(                               \
      const Tensor<T>&, const ConvSpec<T>&, const TilePlan&,                   \
      const PartitionOptions&);

FD_INSTANTIATE_CONV(float)
FD_INSTANTIATE_CONV(double)

#undef FD_INSTANTIATE_CONV

}  // namespace finedetail
