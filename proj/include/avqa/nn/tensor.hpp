/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AVQA_NN_TENSOR_HPP_
#define AVQA_NN_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avqa::nn {

using Shape = std::vector<int>;

std::size_t num_elements(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major array of doubles. Value type; ops never alias inputs.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  // Negative indices count from the back.
  int dim(int i) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2-D accessor for [rows, cols] tensors.
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_.back() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * shape_.back() + c];
  }

  Tensor reshaped(Shape shape) const;
  void fill(double v);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double s);

double dot(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& t);

// Throws NumericError naming `op` if any element is NaN or Inf. No-op when
// finite checks are disabled.
void check_finite(const Tensor& t, std::string_view op);
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

}  // namespace avqa::nn

#endif  // AVQA_NN_TENSOR_HPP_
