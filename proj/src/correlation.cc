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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "finedetail/bench.h"
#include "finedetail/error.h"

namespace finedetail {
namespace {

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedResult("correlation undefined: a series has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

void RatingSeries::Validate() const {
  FD_REQUIRE(metric.size() == rating.size(),
             "series lengths differ: " + std::to_string(metric.size()) + " vs " +
                 std::to_string(rating.size()));
  FD_REQUIRE(metric.size() >= 3, "correlation needs at least 3 pairs");
  for (std::size_t i = 0; i < metric.size(); ++i) {
    FD_REQUIRE(std::isfinite(metric[i]) && std::isfinite(rating[i]),
               "series value " + std::to_string(i) + " is not finite");
  }
}

std::vector<double> FractionalRanks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double Plcc(const RatingSeries& s) {
  s.Validate();
  return Pearson(s.metric, s.rating);
}

double Srcc(const RatingSeries& s) {
  s.Validate();
  return Pearson(FractionalRanks(s.metric), FractionalRanks(s.rating));
}

}  // namespace finedetail
