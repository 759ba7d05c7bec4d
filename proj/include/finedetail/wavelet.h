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

// Single-level orthonormal 2D Haar transform and the wavelet-domain
// training loss built on it.
//
// With L = [1, 1] / sqrt(2) and H = [-1, 1] / sqrt(2), the four 2x2 kernels
// are the outer products LL^T, LH^T, HL^T, HH^T (first factor along rows,
// second along columns), applied with stride 2. The transform is orthonormal,
// so with unit band weights the wavelet loss equals the plain squared error
// of the residual, and so does its gradient. Band weights other than 1 are
// what make the loss favor some sub-bands over others.

#ifndef FINEDETAIL_WAVELET_H_
#define FINEDETAIL_WAVELET_H_

#include <array>

#include "finedetail/tensor.h"

namespace finedetail {

enum class Band { kLL = 0, kLH = 1, kHL = 2, kHH = 3 };

inline constexpr std::array<const char*, 4> kBandNames = {"ll", "lh", "hl",
                                                          "hh"};

class HaarKernels {
 public:
  // Built once; construction verifies that the flattened 4x4 kernel matrix
  // is orthogonal.
  static const HaarKernels& Get();

  // kernel(b)[u * 2 + v] multiplies x[2i + u][2j + v].
  const std::array<double, 4>& kernel(Band b) const {
    return k_[static_cast<int>(b)];
  }
  // max |K K^T - I|
  double OrthogonalityError() const;

 private:
  HaarKernels();
  std::array<std::array<double, 4>, 4> k_;
};

template <typename T>
struct SubBands {
  Tensor<T> ll, lh, hl, hh;

  Tensor<T>& operator[](Band b) {
    switch (b) {
      case Band::kLL: return ll;
      case Band::kLH: return lh;
      case Band::kHL: return hl;
      default: return hh;
    }
  }
  const Tensor<T>& operator[](Band b) const {
    return const_cast<SubBands&>(*this)[b];
  }
};

struct BandWeights {
  double ll = 1.0, lh = 1.0, hl = 1.0, hh = 1.0;

  static BandWeights Unit() { return {}; }
  // Low band kept at 1, high bands doubled.
  static BandWeights Emphasis() { return {1.0, 2.0, 2.0, 2.0}; }

  double operator[](Band b) const {
    switch (b) {
      case Band::kLL: return ll;
      case Band::kLH: return lh;
      case Band::kHL: return hl;
      default: return hh;
    }
  }
  bool IsUnit() const { return ll == 1.0 && lh == 1.0 && hl == 1.0 && hh == 1.0; }
  void Validate() const;
};

enum class Reduction { kSum, kMean };

struct BandEnergies {
  std::array<double, 4> e{};  // ll, lh, hl, hh
  double total() const { return e[0] + e[1] + e[2] + e[3]; }
};

// Requires even height and width.
template <typename T>
SubBands<T> DwtHaar(const Tensor<T>& x);

// Requires the four bands to share one shape.
template <typename T>
Tensor<T> IdwtHaar(const SubBands<T>& bands);

// Per-band ||dwt(pred)_b - dwt(target)_b||^2.
template <typename T>
BandEnergies BandResidualEnergy(const Tensor<T>& pred, const Tensor<T>& target);

// w_t * sum_b lambda_b ||dwt(pred)_b - dwt(target)_b||^2, optionally divided
// by the element count.
template <typename T>
double WlfLoss(const Tensor<T>& pred, const Tensor<T>& target,
               const BandWeights& weights, double w_t,
               Reduction reduction = Reduction::kSum);

// Loss as above; writes d loss / d pred into *grad (resized as needed).
template <typename T>
double WlfLossAndGrad(const Tensor<T>& pred, const Tensor<T>& target,
                      const BandWeights& weights, double w_t,
                      Reduction reduction, Tensor<T>* grad);

// ||pred - target||^2 without any transform.
template <typename T>
double SquaredError(const Tensor<T>& pred, const Tensor<T>& target,
                    Reduction reduction = Reduction::kSum);

}  // namespace finedetail

#endif  // FINEDETAIL_WAVELET_H_
