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

// Run configuration: a UTF-8 text file of `key = value` lines. `#` starts a
// comment; blank lines are ignored. Relative paths resolve against the
// directory holding the file. See README.md for the full key list.

#ifndef AVQA_CONFIG_HPP_
#define AVQA_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "avqa/model.hpp"

namespace avqa {

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path media_root;  // <id>.y4m and <id>.wav
  std::filesystem::path scores;
  std::filesystem::path hm_root;     // *.csv traces
  std::filesystem::path output_dir;
  // Optional; default to files under output_dir.
  std::filesystem::path mos;
  std::filesystem::path split_file;
  std::filesystem::path checkpoint;

  std::uint64_t split_seed = 0;
  double split_ratio = 0.8;
  std::string train_on = "train";  // "train" split only, or "all"
  ModelConfig model;

  std::filesystem::path mos_path() const;
  std::filesystem::path split_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path video_path(const std::string& id) const;
  std::filesystem::path audio_path(const std::string& id) const;
};

// Sets one key. Throws ValidationError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir);

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Every key, one per line, in a fixed order.
std::string format_run_config(const RunConfig& cfg);

// Field ranges only; commands check the paths they need.
void validate(const RunConfig& cfg);

// Throws ValidationError when `path` is empty or missing.
void require_path(const std::filesystem::path& path, std::string_view key);

}  // namespace avqa

#endif  // AVQA_CONFIG_HPP_
