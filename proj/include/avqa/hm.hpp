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

// Head-movement traces: yaw/pitch/roll in degrees, sampled nominally at 120 Hz.

#ifndef AVQA_HM_HPP_
#define AVQA_HM_HPP_

#include <array>
#include <string>
#include <vector>

namespace avqa {

struct HeadMovementTrace {
  static constexpr double kNominalRate = 120.0;
  std::vector<double> t;  // seconds, strictly increasing
  std::vector<double> yaw;
  std::vector<double> pitch;
  std::vector<double> roll;
  std::size_t size() const { return t.size(); }
};

// CSV `t,yaw,pitch,roll`. Rows sharing a timestamp with the previous row are
// dropped. Errors on empty input, decreasing time, or angles out of range.
HeadMovementTrace parse_hm(const std::string& text, const std::string& context = "hm");
HeadMovementTrace load_hm(const std::string& path);
std::string format_hm(const HeadMovementTrace& trace);

// Maps any angle to (-180, 180].
double wrap_degrees(double a);

struct AxisSpeed {
  double mean = 0.0;  // total |delta| / total time, deg/s
  double max = 0.0;   // largest per-interval speed, deg/s
};

struct HmSummary {
  static constexpr int kYawBins = 36;
  std::size_t samples = 0;
  double duration = 0.0;
  AxisSpeed yaw, pitch, roll;
  // Bin i covers wrapped yaw in [-180 + 10i, -170 + 10i); 180 falls in the last.
  std::array<double, kYawBins> yaw_histogram{};
  int occupied_yaw_bins = 0;
  double pitch_within_30 = 0.0;
};

HmSummary hm_stats(const HeadMovementTrace& trace);

// One header row then one row per trace.
std::string format_hm_summary_csv(const std::vector<std::pair<std::string, HmSummary>>& rows);

}  // namespace avqa

#endif  // AVQA_HM_HPP_
