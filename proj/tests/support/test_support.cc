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

#include "test_support.h"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "finedetail/bench.h"
#include "finedetail/error.h"

#ifndef FD_TEST_DATA_DIR
#error "FD_TEST_DATA_DIR must be defined"
#endif

namespace finedetail::testing {
namespace {

std::uint8_t Clamp8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct Rgb {
  double r, g, b;
};

Rgb RandomColor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(20.0, 235.0);
  const double r = u(rng), g = u(rng), b = u(rng);
  return {r, g, b};
}

void Put(ImageU8& img, std::size_t x, std::size_t y, const Rgb& c) {
  img.at(x, y, 0) = Clamp8(c.r);
  img.at(x, y, 1) = Clamp8(c.g);
  img.at(x, y, 2) = Clamp8(c.b);
}

Rgb Mix(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

// Separable box blur with the given radius, clamped at the borders.
std::vector<double> BoxBlur(const std::vector<double>& in, std::size_t n, int r) {
  std::vector<double> tmp(in.size()), out(in.size());
  const auto N = static_cast<int>(n);
  for (int y = 0; y < N; ++y) {
    for (int x = 0; x < N; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += in[y * N + std::clamp(x + k, 0, N - 1)];
      tmp[y * N + x] = acc / (2 * r + 1);
    }
  }
  for (int y = 0; y < N; ++y) {
    for (int x = 0; x < N; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += tmp[std::clamp(y + k, 0, N - 1) * N + x];
      out[y * N + x] = acc / (2 * r + 1);
    }
  }
  return out;
}

}  // namespace

std::filesystem::path DataDir() { return FD_TEST_DATA_DIR; }
std::filesystem::path PhotoDir() { return DataDir() / "photo"; }
std::filesystem::path CorpusDir(std::uint64_t seed) {
  return DataDir() / "corpus" / ("seed_" + std::to_string(seed));
}

std::vector<std::pair<std::string, ImageU8>> SyntheticCorpus(std::uint64_t seed,
                                                            std::size_t size) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t n = size;
  std::vector<std::pair<std::string, ImageU8>> out;

  {
    ImageU8 img(n, n, 3);
    const Rgb c = RandomColor(rng);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) Put(img, x, y, c);
    out.emplace_back("constant", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    const Rgb a = RandomColor(rng), b = RandomColor(rng), c = RandomColor(rng);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double tx = static_cast<double>(x) / (n - 1);
        const double ty = static_cast<double>(y) / (n - 1);
        Put(img, x, y, Mix(Mix(a, b, tx), c, 0.5 * ty));
      }
    }
    out.emplace_back("gradient", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    const Rgb a = RandomColor(rng), b = RandomColor(rng);
    const double cx = u01(rng) * n, cy = u01(rng) * n;
    const double period = (0.5 + u01(rng)) * n;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double d = std::hypot(x - cx, y - cy);
        const double t = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * d / period);
        Put(img, x, y, Mix(a, b, t));
      }
    }
    out.emplace_back("radial", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> ch(3, std::vector<double>(n * n));
    for (auto& c : ch) {
      for (double& v : c) v = g(rng);
      c = BoxBlur(BoxBlur(c, n, 8), n, 8);
    }
    const Rgb base = RandomColor(rng);
    for (std::size_t i = 0; i < n * n; ++i) {
      Put(img, i % n, i / n,
          {base.r + 400.0 * ch[0][i], base.g + 400.0 * ch[1][i], base.b + 400.0 * ch[2][i]});
    }
    out.emplace_back("blurred_noise", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    const Rgb a = RandomColor(rng), b = RandomColor(rng);
    const std::size_t cell = std::size_t{4} << std::uniform_int_distribution<int>(0, 2)(rng);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) Put(img, x, y, ((x / cell + y / cell) % 2) ? a : b);
    out.emplace_back("checker", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    const Rgb a = RandomColor(rng), b = RandomColor(rng);
    const std::size_t w = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) Put(img, x, y, ((x / w) % 2) ? a : b);
    out.emplace_back("stripes", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    const Rgb a = RandomColor(rng), b = RandomColor(rng);
    std::normal_distribution<double> g(0.0, 12.0);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        Rgb c = Mix(a, b, static_cast<double>(x + y) / (2 * n - 2));
        const double s = ((x / 8 + y / 8) % 2) ? 25.0 : -25.0;
        c = {c.r + s + g(rng), c.g + s + g(rng), c.b + s + g(rng)};
        Put(img, x, y, c);
      }
    }
    out.emplace_back("mixed", std::move(img));
  }
  {
    ImageU8 img(n, n, 3);
    std::uniform_int_distribution<int> byte(0, 255);
    for (std::uint8_t& v : img.data()) v = static_cast<std::uint8_t>(byte(rng));
    out.emplace_back("noise", std::move(img));
  }
  return out;
}

std::vector<std::string> SmoothCorpusNames() {
  return {"constant", "gradient", "radial", "blurred_noise"};
}

ImageU8 MirrorTile(const ImageU8& src, std::size_t width, std::size_t height) {
  ImageU8 out(width, height, src.channels());
  const std::size_t w = src.width(), h = src.height();
  for (std::size_t y = 0; y < height; ++y) {
    std::size_t sy = y % (2 * h);
    if (sy >= h) sy = 2 * h - 1 - sy;
    for (std::size_t x = 0; x < width; ++x) {
      std::size_t sx = x % (2 * w);
      if (sx >= w) sx = 2 * w - 1 - sx;
      for (std::size_t c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

std::vector<std::filesystem::path> PhotoFiles() { return ListImages(PhotoDir()); }

double Psnr(const ImageU8& a, const ImageU8& b) {
  FD_REQUIRE(a.width() == b.width() && a.height() == b.height() &&
                 a.channels() == b.channels(),
             "psnr: image shapes differ");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  if (se == 0.0) return INFINITY;
  const double mse = se / static_cast<double>(a.data().size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "fdtest_XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw IoError("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<std::uint64_t> BruteForceGlcm(const std::vector<int>& pixels,
                                          std::size_t width, std::size_t height,
                                          int levels, int dy, int dx) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels * levels), 0);
  const auto W = static_cast<long>(width), H = static_cast<long>(height);
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      const long y2 = y + dy, x2 = x + dx;
      if (y2 < 0 || y2 >= H || x2 < 0 || x2 >= W) continue;
      const int a = pixels[y * W + x], b = pixels[y2 * W + x2];
      ++counts[static_cast<std::size_t>(a * levels + b)];
    }
  }
  return counts;
}

TensorD NaiveConv2d(const TensorD& x, const ConvSpec<double>& s) {
  const long H = static_cast<long>(x.height()), W = static_cast<long>(x.width());
  const long kh = static_cast<long>(s.kernel_h), kw = static_cast<long>(s.kernel_w);
  const long sy = static_cast<long>(s.stride.y), sx = static_cast<long>(s.stride.x);
  const long dy = static_cast<long>(s.dilation.y), dx = static_cast<long>(s.dilation.x);
  const long py = static_cast<long>(s.padding.y), px = static_cast<long>(s.padding.x);
  const long oh = (H + 2 * py - dy * (kh - 1) - 1) / sy + 1;
  const long ow = (W + 2 * px - dx * (kw - 1) - 1) / sx + 1;
  TensorD out(s.out_channels, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow));
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (long i = 0; i < oh; ++i) {
      for (long j = 0; j < ow; ++j) {
        double acc = s.bias[o];
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (long a = 0; a < kh; ++a) {
            for (long b = 0; b < kw; ++b) {
              const long yy = i * sy - py + a * dy, xx = j * sx - px + b * dx;
              if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              acc += s.weight(o, c, static_cast<std::size_t>(a), static_cast<std::size_t>(b)) *
                     x.at(c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
            }
          }
        }
        out.at(o, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
      }
    }
  }
  return out;
}

TensorD NaiveUpsample(const TensorD& x) {
  TensorD u(x.channels(), 2 * x.height(), 2 * x.width());
  for (std::size_t c = 0; c < u.channels(); ++c)
    for (std::size_t y = 0; y < u.height(); ++y)
      for (std::size_t xx = 0; xx < u.width(); ++xx) u.at(c, y, xx) = x.at(c, y / 2, xx / 2);
  return u;
}

GradientCheckResult CheckGradient(const flow::DenoiserModel& model,
                                  std::span<const flow::Sample> batch,
                                  const flow::TrainConfig& cfg, double h,
                                  double floor) {
  const flow::LossAndGradient lg = flow::LossAndGrad(model, batch, cfg);
  flow::DenoiserModel probe = model;
  GradientCheckResult r;
  for (std::size_t i = 0; i < probe.params().size(); ++i) {
    const double orig = probe.params()[i];
    probe.params()[i] = orig + h;
    const double up = flow::LossAndGrad(probe, batch, cfg, -1, false).loss;
    probe.params()[i] = orig - h;
    const double down = flow::LossAndGrad(probe, batch, cfg, -1, false).loss;
    probe.params()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = lg.grad[i];
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), floor});
    if (rel > r.max_rel_error || i == 0) {
      r.max_rel_error = rel;
      r.worst_index = i;
      r.analytic = a;
      r.numeric = numeric;
    }
  }
  return r;
}

flow::DenoiserModel RandomModel(std::uint64_t seed, std::size_t channels,
                                std::size_t hidden) {
  flow::DenoiserModel m(channels, hidden);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.4);
  for (double& p : m.params()) p = n(rng);
  return m;
}

std::vector<flow::Sample> RandomBatch(std::uint64_t seed, std::size_t channels,
                                      std::size_t size, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t01(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<flow::Sample> batch;
  for (int i = 0; i < count; ++i) {
    flow::Sample s;
    s.x0 = TensorD(channels, size, size);
    s.eps = TensorD(channels, size, size);
    for (double& v : s.x0.data()) v = u(rng);
    for (double& v : s.eps.data()) v = n(rng);
    s.t = t01(rng);
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace finedetail::testing
