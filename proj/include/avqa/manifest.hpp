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

// Dataset model and uncompressed media ingestion: sequence manifests,
// YUV4MPEG2 luma, PCM16 WAV audio and subjective rating tables.

#ifndef AVQA_MANIFEST_HPP_
#define AVQA_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace avqa {

enum class Scene {
  kHdr,
  kDark,
  kIndoor,
  kOutdoor,
  kNight,
  kGardenArchitecture,
  kUrbanArchitecture,
  kIndoorCompetition,
  kOutdoorCompetition,
  kStudioProgram,
};

enum class Device { kInsta360Pro2, kInsta360X3, kSynthetic };
enum class Motion { kStatic, kDynamic };
enum class Split { kTrain, kTest, kUnassigned };

std::string_view to_string(Scene s);
std::string_view to_string(Device d);
std::string_view to_string(Motion m);
std::string_view to_string(Split s);
Scene scene_from_string(std::string_view s);
Device device_from_string(std::string_view s);
Motion motion_from_string(std::string_view s);
Split split_from_string(std::string_view s);

inline constexpr int kNumScenes = 10;

struct SequenceManifestEntry {
  std::string sequence_id;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  double duration_s = 0.0;
  Scene scene = Scene::kOutdoor;
  Device device = Device::kSynthetic;
  int audio_channels = 2;
  int audio_sample_rate = 48000;
  Motion motion = Motion::kStatic;
  Split split = Split::kUnassigned;
};

// Throws ValidationError naming the broken invariant.
void validate(const SequenceManifestEntry& e);

std::vector<SequenceManifestEntry> load_manifest(const std::filesystem::path& path);
std::vector<SequenceManifestEntry> parse_manifest(std::string_view text);
std::string format_manifest(const std::vector<SequenceManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<SequenceManifestEntry>& entries);

// Luma-only video. Pixel values are on the 8-bit scale [0,255] but stored as
// reals so analysis code can scale or offset them.
struct FrameSequence {
  int width = 0;
  int height = 0;
  int fps_num = 25;
  int fps_den = 1;
  std::vector<std::vector<float>> frames;

  double fps() const { return static_cast<double>(fps_num) / fps_den; }
  std::size_t num_frames() const { return frames.size(); }
  std::size_t frame_size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

void validate(const FrameSequence& seq);

FrameSequence load_y4m(const std::filesystem::path& path);
FrameSequence parse_y4m(std::string_view bytes);
// Writes 4:2:0 with neutral chroma. Luma is rounded and clamped to [0,255].
std::string format_y4m(const FrameSequence& seq);
void write_y4m(const std::filesystem::path& path, const FrameSequence& seq);

struct AudioClip {
  int sample_rate = 16000;
  std::vector<std::vector<double>> samples;  // one array per channel

  int channels() const { return static_cast<int>(samples.size()); }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
  double duration_s() const {
    return static_cast<double>(length()) / sample_rate;
  }
};

void validate(const AudioClip& clip);

AudioClip load_wav(const std::filesystem::path& path);
AudioClip parse_wav(std::string_view bytes);
std::string format_wav(const AudioClip& clip);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

AudioClip downmix_mono(const AudioClip& clip);

// Linear-interpolation resampler. Used to bring camera audio to the
// front-end rate; not band-limited.
AudioClip resample_linear(const AudioClip& clip, int target_rate);

// Continuous [0,100] rating scale. The five labels sit at the centres of
// equal fifths.
enum class RatingLabel { kBad, kPoor, kFair, kGood, kExcellent };
double anchor_score(RatingLabel label);
RatingLabel nearest_label(double score);

struct RatingRecord {
  std::string subject_id;
  std::string sequence_id;
  std::string session_id;
  double score = 0.0;
  bool ssq_flag = false;
};

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path);
std::vector<RatingRecord> parse_ratings(std::string_view text);
std::string format_ratings(const std::vector<RatingRecord>& records);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace avqa

#endif  // AVQA_MANIFEST_HPP_
