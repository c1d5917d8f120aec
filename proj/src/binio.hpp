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

// Little-endian binary encoding helpers shared by the feature dump and
// checkpoint formats.

#ifndef AVQA_SRC_BINIO_HPP_
#define AVQA_SRC_BINIO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "avqa/error.hpp"

namespace avqa::binio {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  Reader(std::string_view bytes, std::string what) : b_(bytes), what_(std::move(what)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == b_.size(); }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw DataError(what_ + ": truncated at byte " + std::to_string(pos_));
  }

  std::string_view b_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace avqa::binio

#endif  // AVQA_SRC_BINIO_HPP_
