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

#include "avqa/nn/checkpoint.hpp"

#include "avqa/error.hpp"
#include "avqa/manifest.hpp"
#include "../binio.hpp"

namespace avqa::nn {

std::string format_checkpoint(const TensorMap& tensors) {
  std::string out = "AVQC";
  binio::put_u32(out, kCheckpointVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    binio::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    binio::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) binio::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) binio::put_f32(out, static_cast<float>(v));
  }
  return out;
}

TensorMap parse_checkpoint(std::string_view bytes) {
  binio::Reader r(bytes, "checkpoint");
  if (r.bytes(4) != "AVQC") throw DataError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  TensorMap out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32();
    std::string name(r.bytes(len));
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw DataError("checkpoint: implausible rank for '" + name + "'");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(r.u32()));
    std::vector<double> data(num_elements(shape));
    for (auto& v : data) v = r.f32();
    if (!out.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw DataError("checkpoint: duplicate tensor '" + name + "'");
    }
  }
  if (!r.at_end()) throw DataError("checkpoint: trailing bytes");
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const TensorMap& tensors) {
  write_file(path, format_checkpoint(tensors));
}

TensorMap read_checkpoint(const std::filesystem::path& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const DataError& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

Tensor round_to_f32(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace avqa::nn
