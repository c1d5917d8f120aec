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

#include "avqa/nn/params.hpp"

#include <cmath>
#include <numbers>

#include "avqa/error.hpp"

namespace avqa::nn {

Tensor& ParamStore::add(const std::string& name, Shape shape) {
  if (values_.count(name)) throw ValidationError("duplicate parameter '" + name + "'");
  grads_.emplace(name, Tensor(shape));
  return values_.emplace(name, Tensor(std::move(shape))).first->second;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ValidationError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ValidationError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    const Tensor& v = value(name);
    it = grads_.emplace(name, Tensor(v.shape())).first;
  }
  return it->second;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw ValidationError("missing gradient for '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (const auto& [name, v] : values_) {
    auto it = grads_.find(name);
    if (it == grads_.end() || it->second.shape() != v.shape()) {
      grads_.insert_or_assign(name, Tensor(v.shape()));
    } else {
      it->second.fill(0.0);
    }
  }
}

std::size_t ParamStore::num_parameters() const {
  std::size_t n = 0;
  for (const auto& [_, v] : values_) n += v.size();
  return n;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

void kaiming_uniform(Tensor& w, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
}

}  // namespace avqa::nn
