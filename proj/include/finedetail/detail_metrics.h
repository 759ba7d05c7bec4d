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

// Fine-detail indicators for ultra-high-resolution images.
//
// GLCM score: the image is converted to gray, quantized to `levels` gray
// levels and cut into non-overlapping patch_size x patch_size patches. For
// every patch and every (radius, orientation) displacement a gray-level
// co-occurrence matrix is built and its Shannon entropy taken. The per-patch
// entropy H(p) is the mean over displacements (or, in kAccumulated mode, the
// entropy of the summed matrix), and
//
//   glcm_raw        = -(1/P) * sum_p H(p)      (always <= 0)
//   glcm_normalized = exp(glcm_raw)            (in (0, 1])
//
// glcm_normalized is a monotone view of glcm_raw that lives in the unit
// interval; it is reported alongside the raw value, never instead of it.
//
// Compression ratio: raw RGB bytes (3 per pixel) divided by the size of the
// baseline JPEG stream at quality 95.

#ifndef FINEDETAIL_DETAIL_METRICS_H_
#define FINEDETAIL_DETAIL_METRICS_H_

#include <cstdint>
#include <vector>

#include "finedetail/image.h"
#include "finedetail/jpeg.h"

namespace finedetail {

struct GlcmOffset {
  int radius = 1;        // 1..4 by default, any >= 1 accepted
  int orientation = 0;   // degrees: 0, 45, 90 or 135

  int dy() const;
  int dx() const;
};

// levels x levels co-occurrence counts.
class GlcmMatrix {
 public:
  explicit GlcmMatrix(int levels);

  int levels() const { return levels_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(int i, int j) const { return counts_[i * levels_ + j]; }
  // p(i, j) = count / total; requires total > 0.
  double probability(int i, int j) const;

  void Add(int i, int j, std::uint64_t n = 1) {
    counts_[i * levels_ + j] += n;
    total_ += n;
  }
  void Merge(const GlcmMatrix& other);
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  friend bool operator==(const GlcmMatrix&, const GlcmMatrix&) = default;

 private:
  int levels_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

enum class LogBase { kNatural, kTwo };

enum class PoolMode {
  kPerOffset,    // entropy per displacement, averaged
  kAccumulated,  // displacements summed into one matrix, one entropy
};

struct GlcmConfig {
  int levels = 64;
  int patch_size = 64;
  std::vector<int> radii = {1, 2, 3, 4};
  std::vector<int> orientations = {0, 45, 90, 135};
  bool symmetric = false;
  LogBase log_base = LogBase::kNatural;
  PoolMode pool = PoolMode::kPerOffset;

  std::vector<GlcmOffset> Offsets() const;
  void Validate() const;
};

struct DetailScores {
  double glcm_raw = 0.0;
  double glcm_normalized = 1.0;
  double compression_ratio = 0.0;
  std::size_t patch_count = 0;
};

// Rectangular region of a quantized image.
struct PatchRegion {
  std::size_t x = 0, y = 0;
  std::size_t width = 0, height = 0;
};

// Counts every in-bounds directed pair (a at (y, x), b at (y + dy, x + dx))
// inside the region; symmetric mode also counts (b, a).
GlcmMatrix ComputeGlcm(const GrayQuantized& img, const PatchRegion& region,
                       const GlcmOffset& offset, bool symmetric);

// H = -sum p log p with 0 log 0 = 0. Throws UndefinedResult on an empty
// matrix.
double GlcmEntropy(const GlcmMatrix& m, LogBase base = LogBase::kNatural);

// Fills glcm_raw, glcm_normalized and patch_count.
DetailScores GlcmScore(const ImageU8& img, const GlcmConfig& cfg = {});

// Gray images are expanded to three channels before encoding.
double CompressionRatio(const ImageU8& img,
                        const jpeg::EncoderConfig& cfg = {});

// Both indicators.
DetailScores ScoreImage(const ImageU8& img, const GlcmConfig& glcm = {},
                        const jpeg::EncoderConfig& jpeg = {});

}  // namespace finedetail

#endif  // FINEDETAIL_DETAIL_METRICS_H_
