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

// "AVQC" checkpoint: magic, u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rank, u32 dims[rank], f32 data.
// Little-endian throughout; tensors are written in name order.

#ifndef AVQA_NN_CHECKPOINT_HPP_
#define AVQA_NN_CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "avqa/nn/tensor.hpp"

namespace avqa::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

using TensorMap = std::map<std::string, Tensor>;

std::string format_checkpoint(const TensorMap& tensors);
TensorMap parse_checkpoint(std::string_view bytes);
void write_checkpoint(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap read_checkpoint(const std::filesystem::path& path);

// Rounds every value to float, matching what a checkpoint round trip keeps.
Tensor round_to_f32(const Tensor& t);

}  // namespace avqa::nn

#endif  // AVQA_NN_CHECKPOINT_HPP_
