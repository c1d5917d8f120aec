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

#include "avqa/manifest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "avqa/error.hpp"
#include "csv.hpp"

namespace avqa {

namespace {

constexpr std::array<std::pair<Scene, std::string_view>, kNumScenes> kSceneNames{{
    {Scene::kHdr, "hdr"},
    {Scene::kDark, "dark"},
    {Scene::kIndoor, "indoor"},
    {Scene::kOutdoor, "outdoor"},
    {Scene::kNight, "night"},
    {Scene::kGardenArchitecture, "garden_architecture"},
    {Scene::kUrbanArchitecture, "urban_architecture"},
    {Scene::kIndoorCompetition, "indoor_competition"},
    {Scene::kOutdoorCompetition, "outdoor_competition"},
    {Scene::kStudioProgram, "studio_program"},
}};

constexpr std::array<std::pair<Device, std::string_view>, 3> kDeviceNames{{
    {Device::kInsta360Pro2, "insta360_pro2"},
    {Device::kInsta360X3, "insta360_x3"},
    {Device::kSynthetic, "synthetic"},
}};

constexpr std::array<std::pair<Motion, std::string_view>, 2> kMotionNames{{
    {Motion::kStatic, "static"},
    {Motion::kDynamic, "dynamic"},
}};

constexpr std::array<std::pair<Split, std::string_view>, 3> kSplitNames{{
    {Split::kTrain, "train"},
    {Split::kTest, "test"},
    {Split::kUnassigned, "unassigned"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [e, name] : table)
    if (e == v) return name;
  return "?";
}

template <typename E, std::size_t N>
E value_of(const std::array<std::pair<E, std::string_view>, N>& table,
           std::string_view s, const char* what) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  throw ValidationError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

const std::array<const char*, 11> kManifestKeys{
    "sequence_id", "width",          "height",            "fps",
    "duration_s",  "scene",          "device",            "audio_channels",
    "audio_sample_rate", "motion",   "split"};

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

std::string_view to_string(Scene s) { return name_of(kSceneNames, s); }
std::string_view to_string(Device d) { return name_of(kDeviceNames, d); }
std::string_view to_string(Motion m) { return name_of(kMotionNames, m); }
std::string_view to_string(Split s) { return name_of(kSplitNames, s); }
Scene scene_from_string(std::string_view s) { return value_of(kSceneNames, s, "scene"); }
Device device_from_string(std::string_view s) { return value_of(kDeviceNames, s, "device"); }
Motion motion_from_string(std::string_view s) { return value_of(kMotionNames, s, "motion"); }
Split split_from_string(std::string_view s) { return value_of(kSplitNames, s, "split"); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Manifest

void validate(const SequenceManifestEntry& e) {
  const std::string who = "sequence '" + e.sequence_id + "'";
  if (e.sequence_id.empty()) throw ValidationError("empty sequence_id");
  if (e.width <= 0 || e.height <= 0) throw ValidationError(who + ": non-positive frame size");
  if (e.width != 2 * e.height) {
    throw ValidationError(who + ": not 2:1 ERP (" + std::to_string(e.width) + "x" +
                          std::to_string(e.height) + ")");
  }
  if (!(e.fps > 0.0)) throw ValidationError(who + ": fps must be > 0");
  if (!(e.duration_s > 0.0)) throw ValidationError(who + ": duration_s must be > 0");
  if (e.audio_channels != 1 && e.audio_channels != 2 && e.audio_channels != 4) {
    throw ValidationError(who + ": audio_channels must be 1, 2 or 4");
  }
  if (e.audio_sample_rate <= 0) throw ValidationError(who + ": audio_sample_rate must be > 0");
}

std::vector<SequenceManifestEntry> parse_manifest(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw DataError("empty manifest");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw DataError("manifest parse error at line " +
                    std::to_string(line_of_offset(text, ex.byte)) + ": " + ex.what());
  }
  if (!doc.is_array()) throw DataError("manifest must be a JSON array");
  if (doc.empty()) throw DataError("empty manifest");

  std::vector<SequenceManifestEntry> entries;
  entries.reserve(doc.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!obj.is_object()) throw DataError(where + ": not an object");
    for (const auto& [key, _] : obj.items()) {
      if (std::find_if(kManifestKeys.begin(), kManifestKeys.end(),
                       [&](const char* k) { return key == k; }) == kManifestKeys.end()) {
        throw DataError(where + ": unknown field '" + key + "'");
      }
    }
    auto field = [&](const char* key) -> const nlohmann::json& {
      auto it = obj.find(key);
      if (it == obj.end()) throw DataError(where + ": missing field '" + key + "'");
      return *it;
    };
    SequenceManifestEntry e;
    const char* current = "";
    try {
      current = "sequence_id";
      e.sequence_id = field(current).get<std::string>();
      current = "width";
      e.width = field(current).get<int>();
      current = "height";
      e.height = field(current).get<int>();
      current = "fps";
      e.fps = field(current).get<double>();
      current = "duration_s";
      e.duration_s = field(current).get<double>();
      current = "scene";
      e.scene = scene_from_string(field(current).get<std::string>());
      current = "device";
      e.device = device_from_string(field(current).get<std::string>());
      current = "audio_channels";
      e.audio_channels = field(current).get<int>();
      current = "audio_sample_rate";
      e.audio_sample_rate = field(current).get<int>();
      current = "motion";
      e.motion = motion_from_string(field(current).get<std::string>());
      current = "split";
      e.split = split_from_string(field(current).get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(where + ", field '" + current + "': " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError(where + ", field '" + current + "': " + ex.what());
    }
    try {
      validate(e);
    } catch (const ValidationError& ex) {
      throw ValidationError(where + ": " + ex.what());
    }
    if (!seen.insert(e.sequence_id).second) {
      throw ValidationError(where + ": duplicate sequence_id '" + e.sequence_id + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<SequenceManifestEntry> load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path));
  } catch (const ValidationError& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  } catch (const DataError& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

std::string format_manifest(const std::vector<SequenceManifestEntry>& entries) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json o;
    o["sequence_id"] = e.sequence_id;
    o["width"] = e.width;
    o["height"] = e.height;
    o["fps"] = e.fps;
    o["duration_s"] = e.duration_s;
    o["scene"] = to_string(e.scene);
    o["device"] = to_string(e.device);
    o["audio_channels"] = e.audio_channels;
    o["audio_sample_rate"] = e.audio_sample_rate;
    o["motion"] = to_string(e.motion);
    o["split"] = to_string(e.split);
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<SequenceManifestEntry>& entries) {
  write_file(path, format_manifest(entries));
}

// ---------------------------------------------------------------------------
// YUV4MPEG2

void validate(const FrameSequence& seq) {
  if (seq.width <= 0 || seq.height <= 0) throw ValidationError("frame size must be positive");
  if (seq.frames.empty()) throw ValidationError("frame sequence has no frames");
  for (const auto& f : seq.frames) {
    if (f.size() != seq.frame_size()) throw ValidationError("frame size mismatch in sequence");
  }
}

FrameSequence parse_y4m(std::string_view bytes) {
  constexpr std::string_view kMagic = "YUV4MPEG2 ";
  if (bytes.substr(0, kMagic.size()) != kMagic) throw DataError("y4m: bad magic");
  std::size_t eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw DataError("y4m: unterminated header");

  FrameSequence seq;
  bool mono = false;
  std::istringstream header{std::string(bytes.substr(kMagic.size(), eol - kMagic.size()))};
  std::string tok;
  while (header >> tok) {
    const std::string val = tok.substr(1);
    switch (tok[0]) {
      case 'W':
        seq.width = static_cast<int>(csv::to_int(val, "y4m width"));
        break;
      case 'H':
        seq.height = static_cast<int>(csv::to_int(val, "y4m height"));
        break;
      case 'F': {
        auto colon = val.find(':');
        if (colon == std::string::npos) throw DataError("y4m: bad frame rate '" + val + "'");
        seq.fps_num = static_cast<int>(csv::to_int(val.substr(0, colon), "y4m fps"));
        seq.fps_den = static_cast<int>(csv::to_int(val.substr(colon + 1), "y4m fps"));
        break;
      }
      case 'C':
        if (val == "mono") {
          mono = true;
        } else if (val != "420" && val != "420jpeg" && val != "420paldv" && val != "420mpeg2") {
          throw DataError("y4m: unsupported chroma tag 'C" + val + "'");
        }
        break;
      default:
        break;  // I, A, X: irrelevant to luma extraction
    }
  }
  if (seq.width <= 0 || seq.height <= 0) throw DataError("y4m: header lacks W/H");
  if (seq.fps_num <= 0 || seq.fps_den <= 0) throw DataError("y4m: header lacks a valid F");

  const std::size_t luma = seq.frame_size();
  const std::size_t cw = (static_cast<std::size_t>(seq.width) + 1) / 2;
  const std::size_t ch = (static_cast<std::size_t>(seq.height) + 1) / 2;
  const std::size_t payload = luma + (mono ? 0 : 2 * cw * ch);

  std::size_t pos = eol + 1;
  while (pos < bytes.size()) {
    if (bytes.substr(pos, 5) != "FRAME") {
      throw DataError("y4m: expected FRAME marker at frame " + std::to_string(seq.frames.size()));
    }
    std::size_t fe = bytes.find('\n', pos);
    if (fe == std::string_view::npos) throw DataError("y4m: truncated frame header");
    pos = fe + 1;
    if (bytes.size() - pos < payload) {
      throw DataError("y4m: truncated frame " + std::to_string(seq.frames.size()) + " (" +
                      std::to_string(bytes.size() - pos) + " of " + std::to_string(payload) +
                      " bytes)");
    }
    std::vector<float> plane(luma);
    for (std::size_t i = 0; i < luma; ++i) {
      plane[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i]));
    }
    seq.frames.push_back(std::move(plane));
    pos += payload;
  }
  if (seq.frames.empty()) throw DataError("y4m: no frames");
  return seq;
}

FrameSequence load_y4m(const std::filesystem::path& path) {
  try {
    return parse_y4m(read_file(path));
  } catch (const DataError& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

std::string format_y4m(const FrameSequence& seq) {
  validate(seq);
  std::string out = "YUV4MPEG2 W" + std::to_string(seq.width) + " H" +
                    std::to_string(seq.height) + " F" + std::to_string(seq.fps_num) + ":" +
                    std::to_string(seq.fps_den) + " Ip A1:1 C420jpeg\n";
  const std::size_t cw = (static_cast<std::size_t>(seq.width) + 1) / 2;
  const std::size_t ch = (static_cast<std::size_t>(seq.height) + 1) / 2;
  out.reserve(out.size() + seq.frames.size() * (6 + seq.frame_size() + 2 * cw * ch));
  for (const auto& f : seq.frames) {
    out += "FRAME\n";
    for (float v : f) {
      const float c = std::clamp(std::round(v), 0.0f, 255.0f);
      out.push_back(static_cast<char>(static_cast<unsigned char>(c)));
    }
    out.append(2 * cw * ch, static_cast<char>(128));
  }
  return out;
}

void write_y4m(const std::filesystem::path& path, const FrameSequence& seq) {
  write_file(path, format_y4m(seq));
}

// ---------------------------------------------------------------------------
// WAV

void validate(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw ValidationError("audio sample_rate must be > 0");
  if (clip.samples.empty()) throw ValidationError("audio clip has no channels");
  for (const auto& ch : clip.samples) {
    if (ch.size() != clip.samples[0].size()) {
      throw ValidationError("audio channels differ in length");
    }
  }
}

AudioClip parse_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw DataError("wav: not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  int channels = 0;
  int bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const std::uint32_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (size > b.size() - body) {
      if (id != "data") throw DataError("wav: truncated chunk '" + std::string(id) + "'");
    }
    if (id == "fmt ") {
      if (size < 16) throw DataError("wav: short fmt chunk");
      std::uint16_t format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == 0xFFFE && size >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: the first two GUID bytes carry the codec.
        format = read_u16(b, body + 24);
      }
      if (format != 1) throw DataError("wav: non-PCM codec " + std::to_string(format));
      have_fmt = true;
    } else if (id == "data") {
      const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
      data = b.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw DataError("wav: missing fmt chunk");
  if (!have_data) throw DataError("wav: missing data chunk");
  if (bits != 16) throw DataError("wav: only 16-bit PCM supported, got " + std::to_string(bits));
  if (channels != 1 && channels != 2 && channels != 4) {
    throw DataError("wav: channel count " + std::to_string(channels) + " not in {1,2,4}");
  }
  if (rate == 0) throw DataError("wav: zero sample rate");

  const std::size_t frame_bytes = 2 * static_cast<std::size_t>(channels);
  const std::size_t n = data.size() / frame_bytes;
  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.assign(static_cast<std::size_t>(channels), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(read_u16(data, i * frame_bytes + 2 * c));
      clip.samples[static_cast<std::size_t>(c)][i] = raw / 32768.0;
    }
  }
  return clip;
}

AudioClip load_wav(const std::filesystem::path& path) {
  try {
    return parse_wav(read_file(path));
  } catch (const DataError& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

std::string format_wav(const AudioClip& clip) {
  validate(clip);
  const auto channels = static_cast<std::uint16_t>(clip.channels());
  const std::size_t n = clip.length();
  const auto data_bytes = static_cast<std::uint32_t>(n * channels * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * channels * 2);
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double s = std::clamp(std::round(clip.samples[c][i] * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  write_file(path, format_wav(clip));
}

AudioClip downmix_mono(const AudioClip& clip) {
  validate(clip);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (clip.channels() == 1) {
    out.samples = clip.samples;
    return out;
  }
  const std::size_t n = clip.length();
  std::vector<double> mono(n, 0.0);
  const double inv = 1.0 / clip.channels();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.samples) acc += ch[i];
    mono[i] = acc * inv;
  }
  out.samples.push_back(std::move(mono));
  return out;
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  validate(clip);
  if (target_rate <= 0) throw ValidationError("target sample rate must be > 0");
  if (target_rate == clip.sample_rate) return clip;
  const std::size_t n = clip.length();
  const auto m = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * target_rate / clip.sample_rate));
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  AudioClip out;
  out.sample_rate = target_rate;
  for (const auto& ch : clip.samples) {
    std::vector<double> res(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = j * step;
      const auto i0 = static_cast<std::size_t>(t);
      const double frac = t - static_cast<double>(i0);
      const double a = ch[std::min(i0, n - 1)];
      const double b = ch[std::min(i0 + 1, n - 1)];
      res[j] = a + (b - a) * frac;
    }
    out.samples.push_back(std::move(res));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ratings

double anchor_score(RatingLabel label) {
  return 10.0 + 20.0 * static_cast<int>(label);
}

RatingLabel nearest_label(double score) {
  const int idx = std::clamp(static_cast<int>(score / 20.0), 0, 4);
  return static_cast<RatingLabel>(idx);
}

std::vector<RatingRecord> parse_ratings(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty()) throw DataError("scores: empty file");
  const std::vector<std::string> expected{"subject_id", "sequence_id", "session_id", "score",
                                          "ssq_flag"};
  if (csv::split_line(lines[0]) != expected) {
    throw DataError("scores: header must be subject_id,sequence_id,session_id,score,ssq_flag");
  }
  std::vector<RatingRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = "scores line " + std::to_string(i + 1);
    auto f = csv::split_line(lines[i]);
    if (f.size() != 5) throw DataError(ctx + ": expected 5 fields, got " + std::to_string(f.size()));
    RatingRecord r{f[0], f[1], f[2], csv::to_double(f[3], ctx + " score"),
                   csv::to_bool(f[4], ctx + " ssq_flag")};
    if (!(r.score >= 0.0 && r.score <= 100.0)) {
      throw DataError(ctx + ": score " + f[3] + " outside [0,100]");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  try {
    return parse_ratings(read_file(path));
  } catch (const DataError& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

std::string format_ratings(const std::vector<RatingRecord>& records) {
  std::string out = "subject_id,sequence_id,session_id,score,ssq_flag\n";
  for (const auto& r : records) {
    out += r.subject_id + "," + r.sequence_id + "," + r.session_id + "," + csv::fmt(r.score) +
           "," + (r.ssq_flag ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace avqa
