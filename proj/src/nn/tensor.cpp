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

#include "avqa/nn/tensor.hpp"

#include <atomic>
#include <cmath>
#include <utility>

#include "avqa/error.hpp"

namespace avqa::nn {

namespace {
std::atomic<bool> g_finite_checks{true};
}  // namespace

std::size_t num_elements(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ValidationError("negative tensor dimension in " + to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(num_elements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != num_elements(shape_)) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + to_string(shape_));
  }
}

int Tensor::dim(int i) const {
  const int r = rank();
  if (i < 0) i += r;
  if (i < 0 || i >= r) {
    throw ValidationError("dim index out of range for shape " + to_string(shape_));
  }
  return shape_[static_cast<std::size_t>(i)];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (num_elements(shape) != data_.size()) {
    throw ValidationError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ValidationError("shape mismatch in +=: " + to_string(shape_) + " vs " +
                          to_string(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator*(Tensor a, double s) { return a *= s; }

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ValidationError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

void check_finite(const Tensor& t, std::string_view op) {
  if (!g_finite_checks.load(std::memory_order_relaxed)) return;
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite value produced by " + std::string(op));
    }
  }
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

}  // namespace avqa::nn
