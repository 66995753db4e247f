// Copyright 2026 The SelFSR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SELFSR_TENSOR_HPP_
#define SELFSR_TENSOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selfsr/error.hpp"

namespace selfsr {

/// Extents of a rank-4 (batch, channel, height, width) tensor.
struct Shape {
  std::array<std::int64_t, 4> dims{0, 0, 0, 0};

  constexpr Shape() = default;
  constexpr Shape(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
      : dims{n, c, h, w} {}

  constexpr std::int64_t n() const { return dims[0]; }
  constexpr std::int64_t c() const { return dims[1]; }
  constexpr std::int64_t h() const { return dims[2]; }
  constexpr std::int64_t w() const { return dims[3]; }
  constexpr std::int64_t operator[](int axis) const { return dims[axis]; }
  constexpr std::int64_t numel() const { return dims[0] * dims[1] * dims[2] * dims[3]; }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return "(" + std::to_string(dims[0]) + ", " + std::to_string(dims[1]) + ", " +
           std::to_string(dims[2]) + ", " + std::to_string(dims[3]) + ")";
  }
};

/// Dense row-major (n, c, h, w) array. Plain value type.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape) {
    if (shape.n() < 0 || shape.c() < 0 || shape.h() < 0 || shape.w() < 0) {
      throw ShapeError("negative tensor extent " + shape.str());
    }
    data_.assign(static_cast<std::size_t>(shape.numel()), fill);
  }
  Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != shape.numel()) {
      throw ShapeError("buffer of " + std::to_string(data_.size()) +
                       " elements does not match shape " + shape.str());
    }
  }

  static Tensor scalar(T v) { return Tensor(Shape{1, 1, 1, 1}, v); }

  const Shape& shape() const { return shape_; }
  std::int64_t numel() const { return shape_.numel(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }

  std::int64_t offset(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return ((n * shape_.c() + c) * shape_.h() + h) * shape_.w() + w;
  }
  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<std::size_t>(offset(n, c, h, w))];
  }
  const T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<std::size_t>(offset(n, c, h, w))];
  }
  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
    return data_[0];
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  /// Copy of sample `n` as a (1, c, h, w) tensor.
  Tensor sample(std::int64_t n) const {
    Tensor out(Shape{1, shape_.c(), shape_.h(), shape_.w()});
    const auto per = out.numel();
    std::copy_n(data_.begin() + n * per, per, out.data_.begin());
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_{};
  std::vector<T> data_;
};

/// Stacks (1, c, h, w) tensors along the batch axis.
template <typename T>
Tensor<T> stack_batch(std::span<const Tensor<T>> items) {
  if (items.empty()) throw ShapeError("stack_batch of zero tensors");
  const Shape s = items[0].shape();
  Tensor<T> out(Shape{static_cast<std::int64_t>(items.size()), s.c(), s.h(), s.w()});
  const auto per = s.c() * s.h() * s.w();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].shape() != Shape{1, s.c(), s.h(), s.w()}) {
      throw ShapeError("stack_batch: mismatched item shape " + items[i].shape().str());
    }
    std::copy_n(items[i].ptr(), per, out.ptr() + static_cast<std::int64_t>(i) * per);
  }
  return out;
}

}  // namespace selfsr

#endif  // SELFSR_TENSOR_HPP_
