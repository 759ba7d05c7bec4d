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

// Randomized equivalence suites for the partitioned and dilated conv paths.

#ifndef FINEDETAIL_CONV_CHECK_H_
#define FINEDETAIL_CONV_CHECK_H_

#include <cstdint>
#include <string>

namespace finedetail {

inline constexpr double kSingleTolerance = 1e-5;
inline constexpr double kDoubleTolerance = 1e-10;

struct EquivalenceSummary {
  int cases = 0;
  int failures = 0;
  double max_err_single = 0.0;
  double max_err_double = 0.0;
  std::string first_failure;  // human-readable case description

  bool ok() const { return failures == 0; }
};

// Tiled upsample-conv vs Conv2d(Upsample2xNearest(x)), float and double.
EquivalenceSummary CheckTiledUpsampleConv(int cases, std::uint64_t seed);

// Conv2d(x, spec) vs Conv2d(Upsample2xNearest(x), dilated spec with doubled
// stride), float and double.
EquivalenceSummary CheckDilationDuality(int cases, std::uint64_t seed);

}  // namespace finedetail

#endif  // FINEDETAIL_CONV_CHECK_H_
