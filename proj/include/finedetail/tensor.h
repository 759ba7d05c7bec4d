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

#ifndef FINEDETAIL_TENSOR_H_
#define FINEDETAIL_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finedetail/error.h"

namespace finedetail {

struct Shape3 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

inline std::string ToString(const Shape3& s) {
  return "(" + std::to_string(s.channels) + ", " + std::to_string(s.height) +
         ", " + std::to_string(s.width) + ")";
}

// Dense (channels, height, width) tensor, row-major. Values are finite on
// construction from caller data.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape3 shape) : shape_(shape), data_(shape.size(), T(0)) {}
  Tensor(std::size_t c, std::size_t h, std::size_t w) : Tensor(Shape3{c, h, w}) {}

  Tensor(Shape3 shape, std::vector<T> data)
      : shape_(shape), data_(std::move(data)) {
    FD_REQUIRE(data_.size() == shape_.size(),
               "tensor data length " + std::to_string(data_.size()) +
                   " does not match shape " + ToString(shape_));
    for (const T& v : data_) {
      FD_REQUIRE(std::isfinite(v), "tensor value is not finite");
    }
  }

  const Shape3& shape() const { return shape_; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  const T& at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }

  // Pointer to the first element of row y of channel c.
  T* row(std::size_t c, std::size_t y) {
    return data_.data() + (c * shape_.height + y) * shape_.width;
  }
  const T* row(std::size_t c, std::size_t y) const {
    return data_.data() + (c * shape_.height + y) * shape_.width;
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool AllFinite() const {
    for (const T& v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape3 shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
double SquaredNorm(const Tensor<T>& t) {
  double acc = 0.0;
  for (const T& v : t.data()) acc += static_cast<double>(v) * v;
  return acc;
}

template <typename T>
double MaxAbsDiff(const Tensor<T>& a, const Tensor<T>& b) {
  FD_REQUIRE(a.shape() == b.shape(), "shape mismatch " + ToString(a.shape()) +
                                         " vs " + ToString(b.shape()));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

}  // namespace finedetail

#endif  // FINEDETAIL_TENSOR_H_
