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

#include "avqa/audiofe.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "avqa/error.hpp"
#include "binio.hpp"

namespace avqa {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex g_fftw_plan_mutex;

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double magnitude(int k) const { return std::hypot(out_[k][0], out_[k][1]); }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::vector<double> periodic_hann(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

int stft_frame_count(std::size_t num_samples, int window, int hop) {
  if (num_samples < static_cast<std::size_t>(window)) return 0;
  return 1 + static_cast<int>((num_samples - static_cast<std::size_t>(window)) /
                              static_cast<std::size_t>(hop));
}

StftMagnitude stft_magnitude(const AudioClip& mono, double frame_len_s, double hop_s) {
  validate(mono);
  if (mono.channels() != 1) throw ValidationError("stft_magnitude expects a mono clip");
  if (!(hop_s > 0.0) || frame_len_s < hop_s) {
    throw ValidationError("stft: need frame_len_s >= hop_s > 0");
  }
  StftMagnitude r;
  r.sample_rate = mono.sample_rate;
  r.window_length = static_cast<int>(std::lround(frame_len_s * mono.sample_rate));
  r.hop_length = static_cast<int>(std::lround(hop_s * mono.sample_rate));
  if (r.window_length < 1 || r.hop_length < 1) {
    throw ValidationError("stft: window or hop rounds to zero samples");
  }
  r.fft_size = next_pow2(r.window_length);
  const int bins = r.fft_size / 2 + 1;
  const auto& x = mono.samples[0];
  const int frames = stft_frame_count(x.size(), r.window_length, r.hop_length);
  r.too_short = frames == 0;
  r.magnitude = nn::Tensor({frames, bins});
  if (frames == 0) return r;

  const auto window = periodic_hann(r.window_length);
  RealFft fft(r.fft_size);
  double* in = fft.input();
  for (int f = 0; f < frames; ++f) {
    const std::size_t start = static_cast<std::size_t>(f) * static_cast<std::size_t>(r.hop_length);
    for (int i = 0; i < r.fft_size; ++i) {
      in[i] = i < r.window_length ? x[start + static_cast<std::size_t>(i)] *
                                        window[static_cast<std::size_t>(i)]
                                  : 0.0;
    }
    fft.execute();
    for (int k = 0; k < bins; ++k) r.magnitude.at(f, k) = fft.magnitude(k);
  }
  return r;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_band_edges_hz(int num_mel, double fmin_hz, double fmax_hz) {
  const double lo = hz_to_mel(fmin_hz);
  const double hi = hz_to_mel(fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(num_mel + 2));
  for (int i = 0; i < num_mel + 2; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (num_mel + 1));
  }
  return edges;
}

nn::Tensor mel_filterbank(int num_mel, double fmin_hz, double fmax_hz, int sample_rate,
                          int fft_bins) {
  if (num_mel < 1) throw ValidationError("mel filterbank needs at least one filter");
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= sample_rate / 2.0)) {
    throw ValidationError("mel filterbank: need 0 <= fmin < fmax <= sr/2");
  }
  if (fft_bins < 2) throw ValidationError("mel filterbank: need at least 2 FFT bins");
  const double lo = hz_to_mel(fmin_hz);
  const double hi = hz_to_mel(fmax_hz);
  const double spacing = (hi - lo) / (num_mel + 1);
  const double nyquist = sample_rate / 2.0;
  nn::Tensor fb({num_mel, fft_bins});
  for (int k = 0; k < fft_bins; ++k) {
    const double hz = nyquist * k / (fft_bins - 1);
    if (hz < fmin_hz || hz > fmax_hz) continue;
    const double mel = hz_to_mel(hz);
    for (int m = 0; m < num_mel; ++m) {
      const double left = lo + spacing * m;
      const double center = left + spacing;
      const double right = center + spacing;
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / spacing;
      } else if (mel > center && mel < right) {
        w = (right - mel) / spacing;
      }
      fb.at(m, k) = w;
    }
  }
  return fb;
}

MelSpectrogram log_mel(const StftMagnitude& stft, const nn::Tensor& filterbank,
                       double log_offset) {
  const int frames = stft.magnitude.rank() == 2 ? stft.magnitude.dim(0) : 0;
  const int bins = stft.magnitude.rank() == 2 ? stft.magnitude.dim(1) : 0;
  if (filterbank.rank() != 2 || filterbank.dim(1) != bins) {
    throw ValidationError("log_mel: filterbank has " + nn::to_string(filterbank.shape()) +
                          " but STFT has " + std::to_string(bins) + " bins");
  }
  if (!(log_offset > 0.0)) throw ValidationError("log_mel: log_offset must be > 0");
  const int num_mel = filterbank.dim(0);
  MelSpectrogram mel;
  mel.num_mel = num_mel;
  mel.log_offset = log_offset;
  mel.frame_hop_s = static_cast<double>(stft.hop_length) / stft.sample_rate;
  mel.frame_len_s = static_cast<double>(stft.window_length) / stft.sample_rate;
  mel.values = nn::Tensor({frames, num_mel});
  std::vector<double> power(static_cast<std::size_t>(bins));
  for (int f = 0; f < frames; ++f) {
    for (int k = 0; k < bins; ++k) {
      const double a = stft.magnitude.at(f, k);
      power[static_cast<std::size_t>(k)] = a * a;
    }
    for (int m = 0; m < num_mel; ++m) {
      double e = 0.0;
      for (int k = 0; k < bins; ++k) e += filterbank.at(m, k) * power[static_cast<std::size_t>(k)];
      mel.values.at(f, m) = std::log(e + log_offset);
    }
  }
  nn::check_finite(mel.values, "log_mel");
  return mel;
}

PatchList frame_patches(const MelSpectrogram& mel, int patch_frames, int patch_hop) {
  if (patch_frames < 1 || patch_hop < 1) throw ValidationError("patch size must be positive");
  PatchList out;
  const int frames = mel.num_frames();
  const int bins = mel.num_mel;
  for (int start = 0; start < frames; start += patch_hop) {
    nn::Tensor p({patch_frames, bins});
    const int take = std::min(patch_frames, frames - start);
    std::copy_n(mel.values.data() + static_cast<std::size_t>(start) * bins,
                static_cast<std::size_t>(take) * bins, p.data());
    if (take < patch_frames) out.padded_rows = patch_frames - take;
    out.patches.push_back(std::move(p));
  }
  return out;
}

MelSpectrogram compute_log_mel(const AudioClip& clip, const AudioFrontendConfig& cfg) {
  const AudioClip mono = resample_linear(downmix_mono(clip), cfg.sample_rate);
  const StftMagnitude stft = stft_magnitude(mono, cfg.frame_len_s, cfg.hop_s);
  const nn::Tensor fb = mel_filterbank(cfg.num_mel, cfg.fmin_hz, cfg.fmax_hz, cfg.sample_rate,
                                       stft.fft_size / 2 + 1);
  return log_mel(stft, fb, cfg.log_offset);
}

PatchList audio_patches(const AudioClip& clip, const AudioFrontendConfig& cfg) {
  return frame_patches(compute_log_mel(clip, cfg), cfg.patch_frames, cfg.patch_hop);
}

std::string format_feature_dump(const nn::Tensor& t) {
  std::string out = "AVQF";
  binio::put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) binio::put_u32(out, static_cast<std::uint32_t>(d));
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.values()) binio::put_f32(out, static_cast<float>(v));
  return out;
}

nn::Tensor parse_feature_dump(std::string_view bytes) {
  binio::Reader r(bytes, "feature dump");
  if (r.bytes(4) != "AVQF") throw DataError("feature dump: bad magic");
  const std::uint32_t rank = r.u32();
  if (rank > 8) throw DataError("feature dump: implausible rank " + std::to_string(rank));
  nn::Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(r.u32()));
  const std::size_t n = nn::num_elements(shape);
  if (r.remaining() != 4 * n) throw DataError("feature dump: payload size mismatch");
  std::vector<double> data(n);
  for (auto& v : data) v = r.f32();
  return nn::Tensor(std::move(shape), std::move(data));
}

void write_feature_dump(const std::filesystem::path& path, const nn::Tensor& t) {
  write_file(path, format_feature_dump(t));
}

nn::Tensor read_feature_dump(const std::filesystem::path& path) {
  return parse_feature_dump(read_file(path));
}

}  // namespace avqa
