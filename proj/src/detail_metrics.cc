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

#include "finedetail/detail_metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "finedetail/error.h"

namespace finedetail {

int GlcmOffset::dy() const {
  switch (orientation) {
    case 0: return 0;
    case 45:
    case 90:
    case 135: return -radius;
  }
  throw ContractViolation("orientation must be 0, 45, 90 or 135, got " +
                          std::to_string(orientation));
}

int GlcmOffset::dx() const {
  switch (orientation) {
    case 0:
    case 45: return radius;
    case 90: return 0;
    case 135: return -radius;
  }
  throw ContractViolation("orientation must be 0, 45, 90 or 135, got " +
                          std::to_string(orientation));
}

GlcmMatrix::GlcmMatrix(int levels)
    : levels_(levels),
      counts_(static_cast<std::size_t>(levels) * levels, 0) {
  FD_REQUIRE(levels >= 2 && levels <= 256, "levels must be in [2, 256]");
}

double GlcmMatrix::probability(int i, int j) const {
  if (total_ == 0) throw UndefinedResult("probability of an empty GLCM");
  return static_cast<double>(count(i, j)) / static_cast<double>(total_);
}

void GlcmMatrix::Merge(const GlcmMatrix& other) {
  FD_REQUIRE(other.levels_ == levels_, "GLCM level mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

std::vector<GlcmOffset> GlcmConfig::Offsets() const {
  std::vector<GlcmOffset> out;
  for (int r : radii) {
    for (int o : orientations) out.push_back({r, o});
  }
  return out;
}

void GlcmConfig::Validate() const {
  FD_REQUIRE(levels >= 2 && levels <= 256, "levels must be in [2, 256]");
  FD_REQUIRE(!radii.empty() && !orientations.empty(),
             "at least one radius and one orientation are required");
  int max_radius = 0;
  for (int r : radii) {
    FD_REQUIRE(r >= 1, "radius must be >= 1");
    max_radius = std::max(max_radius, r);
  }
  for (int o : orientations) {
    FD_REQUIRE(o == 0 || o == 45 || o == 90 || o == 135,
               "orientation must be 0, 45, 90 or 135");
  }
  FD_REQUIRE(patch_size >= max_radius + 1,
             "patch size must exceed the largest radius");
}

namespace {

void CheckRegionFits(const PatchRegion& r, int dy, int dx) {
  FD_REQUIRE(dx == 0 || r.width >= static_cast<std::size_t>(std::abs(dx)) + 1,
             "patch too narrow for displacement");
  FD_REQUIRE(dy == 0 || r.height >= static_cast<std::size_t>(std::abs(dy)) + 1,
             "patch too short for displacement");
}

// Loop bounds so that both (y, x) and (y + dy, x + dx) stay in the region.
struct PairRange {
  std::size_t y0, y1, x0, x1;
};

PairRange RangeFor(const PatchRegion& r, int dy, int dx) {
  PairRange p;
  p.y0 = r.y + (dy < 0 ? -dy : 0);
  p.y1 = r.y + r.height - (dy > 0 ? dy : 0);
  p.x0 = r.x + (dx < 0 ? -dx : 0);
  p.x1 = r.x + r.width - (dx > 0 ? dx : 0);
  return p;
}

double LogFactor(LogBase base) {
  return base == LogBase::kTwo ? 1.0 / std::numbers::ln2 : 1.0;
}

// Reusable sparse accumulator for the scoring hot path: counts live in a
// dense levels^2 array, the touched cells in a list so that entropy and
// reset only visit non-zero entries.
class GlcmAccumulator {
 public:
  GlcmAccumulator(int levels, std::size_t max_total)
      : levels_(levels), counts_(static_cast<std::size_t>(levels) * levels, 0),
        log_table_(max_total + 1, 0.0) {
    for (std::size_t c = 1; c <= max_total; ++c) {
      log_table_[c] = std::log(static_cast<double>(c));
    }
    touched_.reserve(counts_.size());
  }

  void AddPairs(const GrayQuantized& img, const PatchRegion& region, int dy,
                int dx, bool symmetric) {
    const PairRange p = RangeFor(region, dy, dx);
    const std::size_t w = img.width;
    const std::uint8_t* data = img.data.data();
    for (std::size_t y = p.y0; y < p.y1; ++y) {
      const std::uint8_t* a = data + y * w;
      const std::uint8_t* b = data + (y + dy) * w + dx;
      for (std::size_t x = p.x0; x < p.x1; ++x) {
        Bump(a[x] * levels_ + b[x]);
        if (symmetric) Bump(b[x] * levels_ + a[x]);
      }
    }
  }

  // Entropy in nats, then resets the accumulator.
  double TakeEntropy() {
    const double log_total = log_table_[total_];
    const double inv_total = 1.0 / static_cast<double>(total_);
    double h = 0.0;
    for (std::uint32_t idx : touched_) {
      const std::uint32_t c = counts_[idx];
      // (c/N) * (ln c - ln N) is exactly zero for a point mass.
      h -= (c * inv_total) * (log_table_[c] - log_total);
      counts_[idx] = 0;
    }
    touched_.clear();
    total_ = 0;
    return h;
  }

  std::size_t total() const { return total_; }

 private:
  void Bump(std::uint32_t idx) {
    if (counts_[idx]++ == 0) touched_.push_back(idx);
    ++total_;
  }

  int levels_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> touched_;
  std::vector<double> log_table_;
  std::size_t total_ = 0;
};

}  // namespace

GlcmMatrix ComputeGlcm(const GrayQuantized& img, const PatchRegion& region,
                       const GlcmOffset& offset, bool symmetric) {
  FD_REQUIRE(region.x + region.width <= img.width &&
                 region.y + region.height <= img.height,
             "patch region outside the image");
  const int dy = offset.dy(), dx = offset.dx();
  CheckRegionFits(region, dy, dx);
  GlcmMatrix m(img.levels);
  const PairRange p = RangeFor(region, dy, dx);
  for (std::size_t y = p.y0; y < p.y1; ++y) {
    for (std::size_t x = p.x0; x < p.x1; ++x) {
      const int a = img.at(x, y);
      const int b = img.at(x + dx, y + dy);
      m.Add(a, b);
      if (symmetric) m.Add(b, a);
    }
  }
  return m;
}

double GlcmEntropy(const GlcmMatrix& m, LogBase base) {
  if (m.total() == 0) {
    throw UndefinedResult("entropy of an empty co-occurrence matrix");
  }
  const double n = static_cast<double>(m.total());
  double h = 0.0;
  for (std::uint64_t c : m.counts()) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h * LogFactor(base);
}

DetailScores GlcmScore(const ImageU8& img, const GlcmConfig& cfg) {
  cfg.Validate();
  const ImageU8 gray = ToGrayscale(img);
  const GrayQuantized q = Quantize(gray, cfg.levels);
  const std::size_t ps = static_cast<std::size_t>(cfg.patch_size);
  const PatchGrid grid = PartitionPatches(q.width, q.height, ps);
  const std::vector<GlcmOffset> offsets = cfg.Offsets();

  const std::size_t pairs_per_offset = ps * ps * (cfg.symmetric ? 2 : 1);
  const std::size_t max_total =
      cfg.pool == PoolMode::kAccumulated ? pairs_per_offset * offsets.size()
                                         : pairs_per_offset;
  GlcmAccumulator acc(cfg.levels, max_total);

  double entropy_sum = 0.0;
  for (const PatchOrigin& o : grid.origins) {
    const PatchRegion region{o.x, o.y, ps, ps};
    double patch_entropy = 0.0;
    if (cfg.pool == PoolMode::kPerOffset) {
      for (const GlcmOffset& off : offsets) {
        acc.AddPairs(q, region, off.dy(), off.dx(), cfg.symmetric);
        patch_entropy += acc.TakeEntropy();
      }
      patch_entropy /= static_cast<double>(offsets.size());
    } else {
      for (const GlcmOffset& off : offsets) {
        acc.AddPairs(q, region, off.dy(), off.dx(), cfg.symmetric);
      }
      patch_entropy = acc.TakeEntropy();
    }
    entropy_sum += patch_entropy;
  }

  DetailScores s;
  s.patch_count = grid.count();
  s.glcm_raw = 0.0 - entropy_sum * LogFactor(cfg.log_base) /
                         static_cast<double>(grid.count());  // +0 when flat
  s.glcm_normalized = std::exp(s.glcm_raw);
  return s;
}

double CompressionRatio(const ImageU8& img, const jpeg::EncoderConfig& cfg) {
  const ImageU8 rgb = ToRgb(img);
  const std::vector<std::uint8_t> encoded = jpeg::EncodeBaseline(rgb, cfg);
  const double raw = static_cast<double>(rgb.width()) * rgb.height() * 3.0;
  return raw / static_cast<double>(encoded.size());
}

DetailScores ScoreImage(const ImageU8& img, const GlcmConfig& glcm,
                        const jpeg::EncoderConfig& jpeg) {
  DetailScores s = GlcmScore(img, glcm);
  s.compression_ratio = CompressionRatio(img, jpeg);
  return s;
}

}  // namespace finedetail
