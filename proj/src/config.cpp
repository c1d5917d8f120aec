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

#include "avqa/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "avqa/error.hpp"
#include "avqa/manifest.hpp"
#include "csv.hpp"

namespace avqa {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long parse_int(std::string_view v, std::string_view key) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ValidationError("config: " + std::string(key) + ": expected an integer, got '" +
                          std::string(v) + "'");
  return out;
}

int parse_i32(std::string_view v, std::string_view key) {
  const long long x = parse_int(v, key);
  if (x < -2147483647LL || x > 2147483647LL)
    throw ValidationError("config: " + std::string(key) + ": out of range");
  return static_cast<int>(x);
}

double parse_real(std::string_view v, std::string_view key) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ValidationError("config: " + std::string(key) + ": expected a number, got '" +
                          std::string(v) + "'");
  return out;
}

bool parse_flag(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: " + std::string(key) + ": expected true or false");
}

std::vector<int> parse_int_list(std::string_view v, std::string_view key) {
  std::vector<int> out;
  for (const auto& f : csv::split_line(v)) out.push_back(parse_i32(trim(f), key));
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

fs::path resolve(std::string_view v, const fs::path& base) {
  if (v.empty()) return {};
  fs::path p{std::string(v)};
  return p.is_absolute() || base.empty() ? p : base / p;
}

using Setter = std::function<void(RunConfig&, std::string_view, const fs::path&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

template <typename M>
Field path_field(const char* key, M member) {
  return {key,
          [member](RunConfig& c, std::string_view v, const fs::path& b) { c.*member = resolve(v, b); },
          [member](const RunConfig& c) { return (c.*member).string(); }};
}

#define AVQA_INT_FIELD(key, expr)                                                     \
  Field {                                                                             \
    key, [](RunConfig& c, std::string_view v, const fs::path&) { expr = parse_i32(v, key); }, \
        [](const RunConfig& c) { return std::to_string(expr); }                       \
  }
#define AVQA_REAL_FIELD(key, expr)                                                     \
  Field {                                                                              \
    key, [](RunConfig& c, std::string_view v, const fs::path&) { expr = parse_real(v, key); }, \
        [](const RunConfig& c) { return csv::fmt(expr); }                              \
  }
#define AVQA_FLAG_FIELD(key, expr)                                                     \
  Field {                                                                              \
    key, [](RunConfig& c, std::string_view v, const fs::path&) { expr = parse_flag(v, key); }, \
        [](const RunConfig& c) { return std::string(expr ? "true" : "false"); }       \
  }
#define AVQA_LIST_FIELD(key, expr)                                                          \
  Field {                                                                                   \
    key, [](RunConfig& c, std::string_view v, const fs::path&) { expr = parse_int_list(v, key); }, \
        [](const RunConfig& c) { return join(expr); }                                       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      path_field("manifest", &RunConfig::manifest),
      path_field("media_root", &RunConfig::media_root),
      path_field("scores", &RunConfig::scores),
      path_field("hm_root", &RunConfig::hm_root),
      path_field("output_dir", &RunConfig::output_dir),
      path_field("mos", &RunConfig::mos),
      path_field("split_file", &RunConfig::split_file),
      path_field("checkpoint", &RunConfig::checkpoint),
      {"split_seed",
       [](RunConfig& c, std::string_view v, const fs::path&) {
         const long long s = parse_int(v, "split_seed");
         if (s < 0) throw ValidationError("config: split_seed must be non-negative");
         c.split_seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.split_seed); }},
      AVQA_REAL_FIELD("split_ratio", c.split_ratio),
      {"train_on",
       [](RunConfig& c, std::string_view v, const fs::path&) {
         if (v != "train" && v != "all")
           throw ValidationError("config: train_on must be 'train' or 'all'");
         c.train_on = std::string(v);
       },
       [](const RunConfig& c) { return c.train_on; }},
      AVQA_INT_FIELD("model.bands", c.model.bands),
      AVQA_LIST_FIELD("model.band_channels", c.model.band_channels),
      AVQA_INT_FIELD("model.band_input_height", c.model.band_input_height),
      AVQA_INT_FIELD("model.band_input_width", c.model.band_input_width),
      AVQA_INT_FIELD("model.d_model", c.model.d_model),
      AVQA_INT_FIELD("model.fusion_blocks", c.model.fusion_blocks),
      AVQA_INT_FIELD("model.heads", c.model.heads),
      AVQA_INT_FIELD("model.ffn_mult", c.model.ffn_mult),
      AVQA_LIST_FIELD("model.audio_channels", c.model.audio_channels),
      AVQA_INT_FIELD("model.frames_per_clip", c.model.frames_per_clip),
      {"model.fusion_mode",
       [](RunConfig& c, std::string_view v, const fs::path&) {
         c.model.fusion_mode = fusion_mode_from_string(v);
       },
       [](const RunConfig& c) { return std::string(to_string(c.model.fusion_mode)); }},
      AVQA_FLAG_FIELD("model.video_positional_encoding", c.model.video_positional_encoding),
      AVQA_FLAG_FIELD("model.audio_positional_encoding", c.model.audio_positional_encoding),
      {"model.seed",
       [](RunConfig& c, std::string_view v, const fs::path&) {
         const long long s = parse_int(v, "model.seed");
         if (s < 0) throw ValidationError("config: model.seed must be non-negative");
         c.model.seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.model.seed); }},
      AVQA_REAL_FIELD("model.lr", c.model.lr),
      AVQA_INT_FIELD("model.epochs", c.model.epochs),
      AVQA_INT_FIELD("model.batch_size", c.model.batch_size),
      AVQA_INT_FIELD("audio.sample_rate", c.model.audio.sample_rate),
      AVQA_REAL_FIELD("audio.frame_len_s", c.model.audio.frame_len_s),
      AVQA_REAL_FIELD("audio.hop_s", c.model.audio.hop_s),
      AVQA_INT_FIELD("audio.num_mel", c.model.audio.num_mel),
      AVQA_REAL_FIELD("audio.fmin_hz", c.model.audio.fmin_hz),
      AVQA_REAL_FIELD("audio.fmax_hz", c.model.audio.fmax_hz),
      AVQA_REAL_FIELD("audio.log_offset", c.model.audio.log_offset),
      AVQA_INT_FIELD("audio.patch_frames", c.model.audio.patch_frames),
      AVQA_INT_FIELD("audio.patch_hop", c.model.audio.patch_hop),
  };
  return f;
}

#undef AVQA_INT_FIELD
#undef AVQA_REAL_FIELD
#undef AVQA_FLAG_FIELD
#undef AVQA_LIST_FIELD

fs::path or_default(const fs::path& p, const fs::path& dir, const char* name) {
  return p.empty() ? dir / name : p;
}

}  // namespace

fs::path RunConfig::mos_path() const { return or_default(mos, output_dir, "mos.csv"); }
fs::path RunConfig::split_path() const { return or_default(split_file, output_dir, "split.csv"); }
fs::path RunConfig::checkpoint_path() const {
  return or_default(checkpoint, output_dir, "model.avqc");
}
fs::path RunConfig::video_path(const std::string& id) const { return media_root / (id + ".y4m"); }
fs::path RunConfig::audio_path(const std::string& id) const { return media_root / (id + ".wav"); }

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                      const fs::path& base_dir) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value, base_dir);
      return;
    }
  }
  throw ValidationError("config: unknown key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (seen.count(key))
      throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen[key] = line_no;
    try {
      set_config_value(cfg, key, value, base_dir);
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ValidationError(std::string("cannot read config: ") + e.what());
  }
  return parse_run_config(text, path.parent_path());
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0))
    throw ValidationError("config: split_ratio must lie in (0, 1)");
  validate(cfg.model);
}

void require_path(const fs::path& path, std::string_view key) {
  if (path.empty()) throw ValidationError("config: " + std::string(key) + " is not set");
  if (!fs::exists(path))
    throw ValidationError("config: " + std::string(key) + " does not exist: " + path.string());
}

}  // namespace avqa
