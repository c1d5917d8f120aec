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

#include "avqa/siti.hpp"

#include <algorithm>
#include <cmath>

#include "avqa/error.hpp"
#include "csv.hpp"

namespace avqa {

namespace {

// Two-pass population standard deviation; the second pass keeps the
// result exact for constant inputs.
template <typename Fn>
double population_stdev(std::size_t n, Fn&& value_at) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += value_at(i);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = value_at(i) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace

double spatial_information(const std::vector<float>& frame, int width, int height) {
  if (width < 3 || height < 3) throw ValidationError("SI needs frames of at least 3x3");
  if (frame.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("SI: frame size does not match dimensions");
  }
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t iw = w - 2;
  const std::size_t ih = static_cast<std::size_t>(height) - 2;
  std::vector<double> mag(iw * ih);
  for (std::size_t y = 1; y + 1 < static_cast<std::size_t>(height); ++y) {
    const float* up = frame.data() + (y - 1) * w;
    const float* mid = frame.data() + y * w;
    const float* dn = frame.data() + (y + 1) * w;
    double* out = mag.data() + (y - 1) * iw;
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double gx = (static_cast<double>(up[x + 1]) - up[x - 1]) +
                        2.0 * (static_cast<double>(mid[x + 1]) - mid[x - 1]) +
                        (static_cast<double>(dn[x + 1]) - dn[x - 1]);
      const double gy = (static_cast<double>(dn[x - 1]) - up[x - 1]) +
                        2.0 * (static_cast<double>(dn[x]) - up[x]) +
                        (static_cast<double>(dn[x + 1]) - up[x + 1]);
      out[x - 1] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return population_stdev(mag.size(), [&](std::size_t i) { return mag[i]; });
}

double temporal_information(const std::vector<float>& prev, const std::vector<float>& cur) {
  if (prev.size() != cur.size() || cur.empty()) {
    throw ValidationError("TI: frames differ in size");
  }
  return population_stdev(cur.size(), [&](std::size_t i) {
    return static_cast<double>(cur[i]) - static_cast<double>(prev[i]);
  });
}

std::vector<double> spatial_information(const FrameSequence& seq) {
  validate(seq);
  std::vector<double> out;
  out.reserve(seq.num_frames());
  for (const auto& f : seq.frames) out.push_back(spatial_information(f, seq.width, seq.height));
  return out;
}

std::vector<double> temporal_information(const FrameSequence& seq) {
  validate(seq);
  if (seq.num_frames() < 2) throw ValidationError("TI needs at least 2 frames");
  std::vector<double> out;
  out.reserve(seq.num_frames() - 1);
  for (std::size_t n = 1; n < seq.num_frames(); ++n) {
    out.push_back(temporal_information(seq.frames[n - 1], seq.frames[n]));
  }
  return out;
}

SITIResult summarize_siti(const FrameSequence& seq) {
  SITIResult r;
  r.si_per_frame = spatial_information(seq);
  if (seq.num_frames() >= 2) r.ti_per_frame = temporal_information(seq);
  auto summarize = [](const std::vector<double>& xs, double& mx, double& mean) {
    if (xs.empty()) return;
    mx = *std::max_element(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += x;
    mean = s / static_cast<double>(xs.size());
  };
  summarize(r.si_per_frame, r.si_max, r.si_mean);
  summarize(r.ti_per_frame, r.ti_max, r.ti_mean);
  return r;
}

std::string format_siti_csv(const std::vector<SITIRow>& rows) {
  std::string out = "sequence_id,si_mean,si_max,ti_mean,ti_max\n";
  for (const auto& row : rows) {
    out += row.sequence_id + "," + csv::fmt(row.result.si_mean) + "," +
           csv::fmt(row.result.si_max) + "," + csv::fmt(row.result.ti_mean) + "," +
           csv::fmt(row.result.ti_max) + "\n";
  }
  return out;
}

}  // namespace avqa
