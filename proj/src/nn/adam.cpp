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

#include "avqa/nn/adam.hpp"

#include <cmath>

#include "avqa/error.hpp"

namespace avqa::nn {

void adam_step(ParamStore& params, AdamState& state) {
  for (const auto& [name, value] : params.values()) {
    if (!params.has_grad(name)) throw ValidationError("adam: missing gradient for '" + name + "'");
    if (params.grads().at(name).shape() != value.shape()) {
      throw ValidationError("adam: gradient shape mismatch for '" + name + "'");
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (auto& [name, value] : params.values()) {
    const Tensor& g = params.grads().at(name);
    auto& m = state.first_moment.try_emplace(name, value.shape()).first->second;
    auto& v = state.second_moment.try_emplace(name, value.shape()).first->second;
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    check_finite(value, "adam update of " + name);
  }
}

}  // namespace avqa::nn
