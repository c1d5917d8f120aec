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

#ifndef AVQA_NN_ADAM_HPP_
#define AVQA_NN_ADAM_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "avqa/nn/params.hpp"

namespace avqa::nn {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

// Bias-corrected Adam:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// Every parameter must have a gradient of matching shape.
void adam_step(ParamStore& params, AdamState& state);

}  // namespace avqa::nn

#endif  // AVQA_NN_ADAM_HPP_
