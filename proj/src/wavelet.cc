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

#include "finedetail/wavelet.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "finedetail/error.h"

namespace finedetail {

HaarKernels::HaarKernels() {
  const double s = 1.0 / std::sqrt(2.0);
  const std::array<double, 2> low = {s, s};
  const std::array<double, 2> high = {-s, s};
  const std::array<double, 2>* factors[4][2] = {
      {&low, &low}, {&low, &high}, {&high, &low}, {&high, &high}};
  for (int b = 0; b < 4; ++b) {
    for (int u = 0; u < 2; ++u) {
      for (int v = 0; v < 2; ++v) {
        k_[b][u * 2 + v] = (*factors[b][0])[u] * (*factors[b][1])[v];
      }
    }
  }
  if (OrthogonalityError() > 1e-12) {
    throw Error(ErrorKind::kNumeric, "Haar kernel matrix is not orthogonal");
  }
}

const HaarKernels& HaarKernels::Get() {
  static const HaarKernels kernels;
  return kernels;
}

double HaarKernels::OrthogonalityError() const {
  double err = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double dot = 0.0;
      for (int i = 0; i < 4; ++i) dot += k_[a][i] * k_[b][i];
      err = std::max(err, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return err;
}

void BandWeights::Validate() const {
  FD_REQUIRE(ll >= 0 && lh >= 0 && hl >= 0 && hh >= 0,
             "band weights must be non-negative");
  FD_REQUIRE(ll > 0 || lh > 0 || hl > 0 || hh > 0,
             "at least one band weight must be positive");
}

namespace {

void RequireEven(const Shape3& s) {
  FD_REQUIRE(s.height % 2 == 0 && s.width % 2 == 0,
             "Haar DWT needs even height and width, got " + ToString(s));
}

// The four band coefficients of the 2x2 block at (2i, 2j).
template <typename T>
std::array<double, 4> Analyze(const Tensor<T>& x, std::size_t c, std::size_t i,
                              std::size_t j) {
  const auto& K = HaarKernels::Get();
  const double px[4] = {static_cast<double>(x.at(c, 2 * i, 2 * j)),
                        static_cast<double>(x.at(c, 2 * i, 2 * j + 1)),
                        static_cast<double>(x.at(c, 2 * i + 1, 2 * j)),
                        static_cast<double>(x.at(c, 2 * i + 1, 2 * j + 1))};
  std::array<double, 4> out;
  for (int b = 0; b < 4; ++b) {
    const auto& k = K.kernel(static_cast<Band>(b));
    out[b] = k[0] * px[0] + k[1] * px[1] + k[2] * px[2] + k[3] * px[3];
  }
  return out;
}

}  // namespace

template <typename T>
SubBands<T> DwtHaar(const Tensor<T>& x) {
  RequireEven(x.shape());
  const Shape3 half{x.channels(), x.height() / 2, x.width() / 2};
  SubBands<T> out{Tensor<T>(half), Tensor<T>(half), Tensor<T>(half),
                  Tensor<T>(half)};
  for (std::size_t c = 0; c < half.channels; ++c) {
    for (std::size_t i = 0; i < half.height; ++i) {
      for (std::size_t j = 0; j < half.width; ++j) {
        const auto v = Analyze(x, c, i, j);
        out.ll.at(c, i, j) = static_cast<T>(v[0]);
        out.lh.at(c, i, j) = static_cast<T>(v[1]);
        out.hl.at(c, i, j) = static_cast<T>(v[2]);
        out.hh.at(c, i, j) = static_cast<T>(v[3]);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> IdwtHaar(const SubBands<T>& bands) {
  const Shape3 s = bands.ll.shape();
  FD_REQUIRE(bands.lh.shape() == s && bands.hl.shape() == s &&
                 bands.hh.shape() == s,
             "sub-bands must share one shape");
  const auto& K = HaarKernels::Get();
  Tensor<T> x(s.channels, s.height * 2, s.width * 2);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t i = 0; i < s.height; ++i) {
      for (std::size_t j = 0; j < s.width; ++j) {
        const double coef[4] = {bands.ll.at(c, i, j), bands.lh.at(c, i, j),
                                bands.hl.at(c, i, j), bands.hh.at(c, i, j)};
        for (int u = 0; u < 2; ++u) {
          for (int v = 0; v < 2; ++v) {
            double acc = 0.0;
            for (int b = 0; b < 4; ++b) {
              acc += coef[b] * K.kernel(static_cast<Band>(b))[u * 2 + v];
            }
            x.at(c, 2 * i + u, 2 * j + v) = static_cast<T>(acc);
          }
        }
      }
    }
  }
  return x;
}

template <typename T>
BandEnergies BandResidualEnergy(const Tensor<T>& pred, const Tensor<T>& target) {
  FD_REQUIRE(pred.shape() == target.shape(),
             "prediction " + ToString(pred.shape()) + " and target " +
                 ToString(target.shape()) + " differ in shape");
  RequireEven(pred.shape());
  BandEnergies e;
  for (std::size_t c = 0; c < pred.channels(); ++c) {
    for (std::size_t i = 0; i < pred.height() / 2; ++i) {
      for (std::size_t j = 0; j < pred.width() / 2; ++j) {
        const auto p = Analyze(pred, c, i, j);
        const auto t = Analyze(target, c, i, j);
        for (int b = 0; b < 4; ++b) {
          const double d = p[b] - t[b];
          e.e[b] += d * d;
        }
      }
    }
  }
  return e;
}

template <typename T>
double WlfLoss(const Tensor<T>& pred, const Tensor<T>& target,
               const BandWeights& weights, double w_t, Reduction reduction) {
  return WlfLossAndGrad<T>(pred, target, weights, w_t, reduction, nullptr);
}

template <typename T>
double WlfLossAndGrad(const Tensor<T>& pred, const Tensor<T>& target,
                      const BandWeights& weights, double w_t,
                      Reduction reduction, Tensor<T>* grad) {
  FD_REQUIRE(pred.shape() == target.shape(),
             "prediction " + ToString(pred.shape()) + " and target " +
                 ToString(target.shape()) + " differ in shape");
  RequireEven(pred.shape());
  weights.Validate();
  FD_REQUIRE(w_t >= 0.0 && std::isfinite(w_t), "loss weight must be >= 0");
  const double lambda[4] = {weights.ll, weights.lh, weights.hl, weights.hh};
  const double scale =
      reduction == Reduction::kMean ? 1.0 / static_cast<double>(pred.size())
                                    : 1.0;
  const auto& K = HaarKernels::Get();
  if (grad != nullptr && grad->shape() != pred.shape()) {
    *grad = Tensor<T>(pred.shape());
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < pred.channels(); ++c) {
    for (std::size_t i = 0; i < pred.height() / 2; ++i) {
      for (std::size_t j = 0; j < pred.width() / 2; ++j) {
        const auto p = Analyze(pred, c, i, j);
        const auto t = Analyze(target, c, i, j);
        double d[4];
        for (int b = 0; b < 4; ++b) {
          d[b] = p[b] - t[b];
          loss += lambda[b] * d[b] * d[b];
        }
        if (grad == nullptr) continue;
        for (int u = 0; u < 2; ++u) {
          for (int v = 0; v < 2; ++v) {
            double g = 0.0;
            for (int b = 0; b < 4; ++b) {
              g += lambda[b] * d[b] * K.kernel(static_cast<Band>(b))[u * 2 + v];
            }
            grad->at(c, 2 * i + u, 2 * j + v) =
                static_cast<T>(2.0 * w_t * scale * g);
          }
        }
      }
    }
  }
  return w_t * scale * loss;
}

template <typename T>
double SquaredError(const Tensor<T>& pred, const Tensor<T>& target,
                    Reduction reduction) {
  FD_REQUIRE(pred.shape() == target.shape(), "shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    acc += d * d;
  }
  if (reduction == Reduction::kMean) acc /= static_cast<double>(pred.size());
  return acc;
}

#define FD_INSTANTIATE_WAVELET(T)                                             \
  template SubBands<T> DwtHaar<T>(const Tensor<T>&);                          \
  template Tensor<T> IdwtHaar<T>(const SubBands<T>&);                         \
  template BandEnergies BandResidualEnergy<T>(const Tensor<T>&,               \
                                              const Tensor<T>&);              \
  template double WlfLoss<T>(const Tensor<T>&, const Tensor<T>&,              \
                             const BandWeights&, double, Reduction);          \
  template double WlfLossAndGrad<T>(const Tensor<T>&, const Tensor<T>&,       \
                                    const BandWeights&, double, Reduction,    \
                                    Tensor<T>*);                              \
  template double SquaredError<T>(const Tensor<T>&, const Tensor<T>&,         \
                                  Reduction);

FD_INSTANTIATE_WAVELET(float)
FD_INSTANTIATE_WAVELET(double)

#undef FD_INSTANTIATE_WAVELET

}  // namespace finedetail
