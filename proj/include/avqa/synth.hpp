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

// Synthetic desk-scale corpus: ERP luma clips, PCM audio, rating tables,
// head-movement traces, a manifest and a run config, all from one seed.
// Each sequence gets a hidden distortion level that drives both the media
// degradation and the simulated opinion scores.

#ifndef AVQA_SYNTH_HPP_
#define AVQA_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "avqa/manifest.hpp"

namespace avqa {

struct SynthOptions {
  int sequences = 8;
  int width = 64;
  int height = 32;
  int frames = 8;
  int fps = 25;
  double audio_seconds = 1.0;
  int sample_rate = 16000;
  int audio_channels = 2;
  int subjects = 20;
  double rating_noise = 5.0;
  double hm_seconds = 2.0;
  std::uint64_t seed = 2026;
};

struct SynthSequence {
  SequenceManifestEntry entry;
  double distortion = 0.0;  // in [0,1]
  double true_mos = 0.0;
  FrameSequence video;
  AudioClip audio;
};

// Distortion levels are evenly spaced over [0,1] and assigned to ids in a
// seeded random order.
std::vector<SynthSequence> make_synth_sequences(const SynthOptions& opts);

std::vector<RatingRecord> make_synth_ratings(const std::vector<SynthSequence>& seqs,
                                             const SynthOptions& opts);

// Writes manifest.json, scores.csv, media/, hm/ and avqa.cfg under `dir`.
std::vector<SynthSequence> write_synth_fixture(const std::filesystem::path& dir,
                                               const SynthOptions& opts = {});

}  // namespace avqa

#endif  // AVQA_SYNTH_HPP_
