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

#include "finedetail/conv_check.h"

#include <algorithm>
#include <random>

#include "finedetail/conv.h"

namespace finedetail {
namespace {

struct RandomCase {
  TensorD x;
  ConvSpec<double> spec;
  std::size_t tile = 1;
};

std::size_t Pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

RandomCase MakeCase(std::mt19937_64& rng, bool allow_dilation,
                    bool allow_stride) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomCase rc;
  const std::size_t cin = Pick(rng, 1, 3), cout = Pick(rng, 1, 3);
  rc.spec = ConvSpec<double>::Zeros(cout, cin, Pick(rng, 1, 5), Pick(rng, 1, 5));
  for (double& w : rc.spec.weights) w = u(rng);
  for (double& b : rc.spec.bias) b = u(rng);
  if (allow_dilation) rc.spec.dilation = {Pick(rng, 1, 2), Pick(rng, 1, 2)};
  if (allow_stride) rc.spec.stride = {Pick(rng, 1, 3), Pick(rng, 1, 3)};
  rc.spec.padding = {Pick(rng, 0, 3), Pick(rng, 0, 3)};
  const std::size_t ey = rc.spec.dilation.y * (rc.spec.kernel_h - 1);
  const std::size_t ex = rc.spec.dilation.x * (rc.spec.kernel_w - 1);
  // Input large enough for a non-empty output in every path.
  const std::size_t h = Pick(rng, std::max<std::size_t>(1, ey + 1), 20);
  const std::size_t w = Pick(rng, std::max<std::size_t>(1, ex + 1), 20);
  rc.x = TensorD(cin, h, w);
  for (double& v : rc.x.data()) v = u(rng);
  rc.tile = Pick(rng, 1, 8);
  return rc;
}

ConvSpec<float> ToFloat(const ConvSpec<double>& s) {
  ConvSpec<float> f = ConvSpec<float>::Zeros(s.out_channels, s.in_channels,
                                             s.kernel_h, s.kernel_w);
  std::transform(s.weights.begin(), s.weights.end(), f.weights.begin(),
                 [](double v) { return static_cast<float>(v); });
  std::transform(s.bias.begin(), s.bias.end(), f.bias.begin(),
                 [](double v) { return static_cast<float>(v); });
  f.stride = s.stride;
  f.dilation = s.dilation;
  f.padding = s.padding;
  return f;
}

std::string Describe(int index, const RandomCase& rc) {
  const auto& s = rc.spec;
  return "case " + std::to_string(index) + ": input " + ToString(rc.x.shape()) +
         " kernel " + std::to_string(s.kernel_h) + "x" + std::to_string(s.kernel_w) +
         " stride " + std::to_string(s.stride.y) + "," + std::to_string(s.stride.x) +
         " dilation " + std::to_string(s.dilation.y) + "," +
         std::to_string(s.dilation.x) + " padding " + std::to_string(s.padding.y) +
         "," + std::to_string(s.padding.x) + " tile " + std::to_string(rc.tile);
}

void Record(EquivalenceSummary& sum, int index, const RandomCase& rc,
            double err_f, double err_d) {
  ++sum.cases;
  sum.max_err_single = std::max(sum.max_err_single, err_f);
  sum.max_err_double = std::max(sum.max_err_double, err_d);
  if (!(err_f <= kSingleTolerance) || !(err_d <= kDoubleTolerance)) {
    if (sum.failures++ == 0) sum.first_failure = Describe(index, rc);
  }
}

}  // namespace

EquivalenceSummary CheckTiledUpsampleConv(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EquivalenceSummary sum;
  for (int i = 0; i < cases; ++i) {
    const RandomCase rc = MakeCase(rng, true, false);
    const TilePlan plan = PlanTiles(rc.x.height(), rc.x.width(), rc.spec, rc.tile);
    const TensorD ref_d = Conv2d(Upsample2xNearest(rc.x), rc.spec);
    const TensorD got_d = PartitionedUpsampleConv(rc.x, rc.spec, plan);
    const TensorF xf = rc.x.Cast<float>();
    const ConvSpec<float> sf = ToFloat(rc.spec);
    const TensorF ref_f = Conv2d(Upsample2xNearest(xf), sf);
    const TensorF got_f = PartitionedUpsampleConv(xf, sf, plan);
    Record(sum, i, rc, MaxAbsDiff(ref_f, got_f), MaxAbsDiff(ref_d, got_d));
  }
  return sum;
}

EquivalenceSummary CheckDilationDuality(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EquivalenceSummary sum;
  for (int i = 0; i < cases; ++i) {
    const RandomCase rc = MakeCase(rng, false, true);
    ConvSpec<double> dil = DilateFirstConv(rc.spec, 2);
    dil.stride = {rc.spec.stride.y * 2, rc.spec.stride.x * 2};
    const TensorD ref_d = Conv2d(rc.x, rc.spec);
    const TensorD got_d = Conv2d(Upsample2xNearest(rc.x), dil);
    const TensorF xf = rc.x.Cast<float>();
    const ConvSpec<float> sf = ToFloat(rc.spec);
    ConvSpec<float> dil_f = DilateFirstConv(sf, 2);
    dil_f.stride = dil.stride;
    const TensorF ref_f = Conv2d(xf, sf);
    const TensorF got_f = Conv2d(Upsample2xNearest(xf), dil_f);
    double ef = 1e300, ed = 1e300;
    if (ref_d.shape() == got_d.shape()) ed = MaxAbsDiff(ref_d, got_d);
    if (ref_f.shape() == got_f.shape()) ef = MaxAbsDiff(ref_f, got_f);
    Record(sum, i, rc, ef, ed);
  }
  return sum;
}

}  // namespace finedetail
