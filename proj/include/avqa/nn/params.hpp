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

#ifndef AVQA_NN_PARAMS_HPP_
#define AVQA_NN_PARAMS_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "avqa/nn/tensor.hpp"

namespace avqa::nn {

// Named learnable tensors and their gradients. Iteration order is the
// lexicographic name order, which fixes checkpoint layout and the order of
// optimizer updates.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Shape shape);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  bool has_grad(const std::string& name) const { return grads_.count(name) != 0; }

  void zero_grad();
  void clear_grads() { grads_.clear(); }

  const std::map<std::string, Tensor>& values() const { return values_; }
  std::map<std::string, Tensor>& values() { return values_; }
  const std::map<std::string, Tensor>& grads() const { return grads_; }
  std::size_t num_parameters() const;

  bool operator==(const ParamStore& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> grads_;
};

// Seeded generator with platform-independent real and integer draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0,1), 53-bit
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();   // Box-Muller
  std::uint64_t below(std::uint64_t n);  // unbiased, [0,n)

 private:
  std::mt19937_64 engine_;
};

// Kaiming-uniform for a weight tensor with the given fan-in.
void kaiming_uniform(Tensor& w, int fan_in, Rng& rng);

}  // namespace avqa::nn

#endif  // AVQA_NN_PARAMS_HPP_
