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

// Audio front-end: framing, STFT magnitude, mel filterbank, stabilized
// log-mel and fixed-size patches for the audio CNN.

#ifndef AVQA_AUDIOFE_HPP_
#define AVQA_AUDIOFE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "avqa/manifest.hpp"
#include "avqa/nn/tensor.hpp"

namespace avqa {

struct AudioFrontendConfig {
  int sample_rate = 16000;
  double frame_len_s = 0.025;
  double hop_s = 0.010;
  int num_mel = 64;
  double fmin_hz = 125.0;
  double fmax_hz = 7500.0;
  double log_offset = 0.01;
  int patch_frames = 96;
  int patch_hop = 96;

  bool operator==(const AudioFrontendConfig&) const = default;
};

// Periodic Hann: 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> periodic_hann(int length);
int next_pow2(int n);

struct StftMagnitude {
  nn::Tensor magnitude;  // [frames, fft_size/2 + 1]
  int window_length = 0;
  int hop_length = 0;
  int fft_size = 0;
  int sample_rate = 0;
  bool too_short = false;  // clip shorter than one window, zero frames
};

int stft_frame_count(std::size_t num_samples, int window, int hop);

// `mono` must have exactly one channel.
StftMagnitude stft_magnitude(const AudioClip& mono, double frame_len_s, double hop_s);

// HTK mel scale: 2595 log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// num_mel + 2 edges evenly spaced in mel between fmin and fmax.
std::vector<double> mel_band_edges_hz(int num_mel, double fmin_hz, double fmax_hz);

// Triangular filters, linear in mel, unit peak; rows are mel bins and
// columns FFT bins 0..fft_bins-1 at frequency k*sr/(2*(fft_bins-1)).
nn::Tensor mel_filterbank(int num_mel, double fmin_hz, double fmax_hz, int sample_rate,
                          int fft_bins);

struct MelSpectrogram {
  nn::Tensor values;  // [frames, num_mel], natural log
  double frame_hop_s = 0.0;
  double frame_len_s = 0.0;
  int num_mel = 0;
  double log_offset = 0.0;
  int num_frames() const { return values.empty() ? 0 : values.dim(0); }
};

// log(filterbank * |X|^2 + log_offset).
MelSpectrogram log_mel(const StftMagnitude& stft, const nn::Tensor& filterbank,
                       double log_offset = 0.01);

struct PatchList {
  std::vector<nn::Tensor> patches;  // each [patch_frames, num_mel]
  int padded_rows = 0;              // zero rows appended to the last patch
};

PatchList frame_patches(const MelSpectrogram& mel, int patch_frames = 96, int patch_hop = 96);

// Downmix, resample to cfg.sample_rate, STFT, log-mel and patching.
PatchList audio_patches(const AudioClip& clip, const AudioFrontendConfig& cfg = {});
MelSpectrogram compute_log_mel(const AudioClip& clip, const AudioFrontendConfig& cfg = {});

// "AVQF" feature dump: magic, u32 rank, u32 dims[rank], f32 payload,
// all little-endian, row-major.
std::string format_feature_dump(const nn::Tensor& t);
nn::Tensor parse_feature_dump(std::string_view bytes);
void write_feature_dump(const std::filesystem::path& path, const nn::Tensor& t);
nn::Tensor read_feature_dump(const std::filesystem::path& path);

}  // namespace avqa

#endif  // AVQA_AUDIOFE_HPP_
