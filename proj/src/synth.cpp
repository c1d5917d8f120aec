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

#include "avqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avqa/error.hpp"
#include "avqa/hm.hpp"
#include "avqa/nn/params.hpp"

namespace avqa {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string seq_id(int i) {
  std::string s = std::to_string(i);
  return "synth_" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

FrameSequence make_video(const SynthOptions& o, int index, double q, nn::Rng& rng) {
  FrameSequence v;
  v.width = o.width;
  v.height = o.height;
  v.fps_num = o.fps;
  v.fps_den = 1;
  const double fx = 2.0 + index % 3;
  const double fy = 1.0 + index % 2;
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  const double speed = 0.3 + 0.1 * (index % 4);
  const double noise_sd = 70.0 * q;
  const int block = 1 + static_cast<int>(std::lround(3.0 * q));
  for (int f = 0; f < o.frames; ++f) {
    std::vector<float> plane(static_cast<std::size_t>(o.width) * o.height);
    for (int y = 0; y < o.height; ++y) {
      for (int x = 0; x < o.width; ++x) {
        // Coarse sampling grid stands in for compression blockiness.
        const int bx = x / block * block;
        const int by = y / block * block;
        const double u = 2.0 * kPi * bx / o.width;
        const double lat = kPi * (0.5 - (by + 0.5) / o.height);
        double val = 128.0 + 60.0 * std::sin(fx * u + speed * f + phase) * std::cos(lat) +
                     40.0 * std::cos(fy * 2.0 * lat + 0.2 * f);
        val += noise_sd * rng.normal();
        plane[static_cast<std::size_t>(y) * o.width + x] =
            static_cast<float>(std::clamp(std::round(val), 0.0, 255.0));
      }
    }
    v.frames.push_back(std::move(plane));
  }
  return v;
}

AudioClip make_audio(const SynthOptions& o, int index, double q, nn::Rng& rng) {
  AudioClip a;
  a.sample_rate = o.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(o.audio_seconds * o.sample_rate));
  const double f0 = 220.0 * (1.0 + index % 4);
  for (int c = 0; c < o.audio_channels; ++c) {
    std::vector<double> ch(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / o.sample_rate;
      double s = 0.3 * std::sin(2.0 * kPi * f0 * t + 0.5 * c) +
                 0.15 * std::sin(2.0 * kPi * 2.0 * f0 * t);
      s += 0.25 * q * rng.normal();
      ch[i] = std::clamp(s, -1.0, 32767.0 / 32768.0);
    }
    a.samples.push_back(std::move(ch));
  }
  // Stored as 16-bit PCM; quantize here so in-memory and on-disk agree.
  for (auto& ch : a.samples)
    for (double& s : ch) s = std::round(s * 32768.0) / 32768.0;
  return a;
}

HeadMovementTrace make_trace(const SynthOptions& o, nn::Rng& rng) {
  HeadMovementTrace tr;
  const auto n = static_cast<int>(std::lround(o.hm_seconds * HeadMovementTrace::kNominalRate));
  double yaw = rng.uniform(-180.0, 180.0);
  double pitch = 0.0;
  double roll = 0.0;
  for (int i = 0; i < n; ++i) {
    tr.t.push_back(i / HeadMovementTrace::kNominalRate);
    tr.yaw.push_back(wrap_degrees(yaw));
    tr.pitch.push_back(pitch);
    tr.roll.push_back(roll);
    yaw += 0.5 * rng.normal();
    pitch = std::clamp(pitch + 0.2 * rng.normal(), -89.0, 89.0);
    roll = std::clamp(roll + 0.05 * rng.normal(), -10.0, 10.0);
  }
  return tr;
}

}  // namespace

std::vector<SynthSequence> make_synth_sequences(const SynthOptions& o) {
  if (o.sequences < 2 || o.width != 2 * o.height || o.height < 2 || o.frames < 1 ||
      o.audio_seconds <= 0.0 || o.subjects < 2)
    throw ValidationError("synth: bad options");
  nn::Rng rng(o.seed);
  std::vector<int> order(static_cast<std::size_t>(o.sequences));
  for (int i = 0; i < o.sequences; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = o.sequences - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[rng.below(static_cast<std::uint64_t>(i) + 1)]);

  std::vector<SynthSequence> out;
  for (int i = 0; i < o.sequences; ++i) {
    SynthSequence s;
    s.distortion = static_cast<double>(order[static_cast<std::size_t>(i)]) / (o.sequences - 1);
    s.true_mos = 90.0 - 75.0 * s.distortion;
    auto& e = s.entry;
    e.sequence_id = seq_id(i);
    e.width = o.width;
    e.height = o.height;
    e.fps = o.fps;
    e.duration_s = static_cast<double>(o.frames) / o.fps;
    e.scene = static_cast<Scene>(i % kNumScenes);
    e.device = Device::kSynthetic;
    e.audio_channels = o.audio_channels;
    e.audio_sample_rate = o.sample_rate;
    e.motion = i % 2 ? Motion::kDynamic : Motion::kStatic;
    s.video = make_video(o, i, s.distortion, rng);
    s.audio = make_audio(o, i, s.distortion, rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RatingRecord> make_synth_ratings(const std::vector<SynthSequence>& seqs,
                                             const SynthOptions& o) {
  nn::Rng rng(o.seed ^ 0x5bd1e995ULL);
  std::vector<RatingRecord> out;
  for (int s = 0; s < o.subjects; ++s) {
    const std::string subject = "S" + std::string(s < 9 ? "0" : "") + std::to_string(s + 1);
    const double bias = 2.0 * rng.normal();
    for (const auto& q : seqs) {
      RatingRecord r;
      r.subject_id = subject;
      r.sequence_id = q.entry.sequence_id;
      r.session_id = subject + "_1";
      r.score = std::clamp(std::round((q.true_mos + bias + o.rating_noise * rng.normal()) * 10.0) / 10.0,
                           0.0, 100.0);
      r.ssq_flag = false;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<SynthSequence> write_synth_fixture(const fs::path& dir, const SynthOptions& o) {
  auto seqs = make_synth_sequences(o);
  std::vector<SequenceManifestEntry> entries;
  nn::Rng hm_rng(o.seed ^ 0x27d4eb2fULL);
  for (const auto& s : seqs) {
    entries.push_back(s.entry);
    write_y4m(dir / "media" / (s.entry.sequence_id + ".y4m"), s.video);
    write_wav(dir / "media" / (s.entry.sequence_id + ".wav"), s.audio);
    write_file(dir / "hm" / (s.entry.sequence_id + ".csv"), format_hm(make_trace(o, hm_rng)));
  }
  write_manifest(dir / "manifest.json", entries);
  write_file(dir / "scores.csv", format_ratings(make_synth_ratings(seqs, o)));
  write_file(dir / "avqa.cfg",
             "# synthetic fixture\n"
             "manifest = manifest.json\n"
             "media_root = media\n"
             "scores = scores.csv\n"
             "hm_root = hm\n"
             "output_dir = out\n"
             "split_seed = " + std::to_string(o.seed) + "\n");
  return seqs;
}

}  // namespace avqa
