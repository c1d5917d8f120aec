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

#include "avqa/hm.hpp"

#include <algorithm>
#include <cmath>

#include "avqa/error.hpp"
#include "avqa/manifest.hpp"
#include "csv.hpp"

namespace avqa {

namespace {

void check_range(double v, double lim, const char* axis, const std::string& where) {
  if (!std::isfinite(v) || v < -lim || v > lim)
    throw DataError(where + ": " + axis + " out of range: " + csv::fmt(v));
}

AxisSpeed axis_speed(const std::vector<double>& a, const std::vector<double>& t, bool wrap) {
  AxisSpeed s;
  double total = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double d = wrap ? wrap_degrees(a[i] - a[i - 1]) : a[i] - a[i - 1];
    const double dt = t[i] - t[i - 1];
    total += std::abs(d);
    s.max = std::max(s.max, std::abs(d) / dt);
  }
  s.mean = total / (t.back() - t.front());
  return s;
}

}  // namespace

double wrap_degrees(double a) {
  double r = std::fmod(a, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

HeadMovementTrace parse_hm(const std::string& text, const std::string& context) {
  const auto lines = csv::split_lines(text);
  if (lines.empty()) throw DataError(context + ": empty head-movement file");
  if (lines[0] != "t,yaw,pitch,roll")
    throw DataError(context + ": expected header t,yaw,pitch,roll");
  HeadMovementTrace tr;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = context + ":" + std::to_string(i + 1);
    const auto f = csv::split_line(lines[i]);
    if (f.size() != 4) throw DataError(where + ": expected 4 fields");
    const double t = csv::to_double(f[0], where);
    const double yaw = csv::to_double(f[1], where);
    const double pitch = csv::to_double(f[2], where);
    const double roll = csv::to_double(f[3], where);
    if (!std::isfinite(t)) throw DataError(where + ": non-finite time");
    check_range(yaw, 180.0, "yaw", where);
    check_range(pitch, 90.0, "pitch", where);
    check_range(roll, 180.0, "roll", where);
    if (!tr.t.empty()) {
      if (t == tr.t.back()) continue;
      if (t < tr.t.back()) throw DataError(where + ": time is not monotone");
    }
    tr.t.push_back(t);
    tr.yaw.push_back(yaw);
    tr.pitch.push_back(pitch);
    tr.roll.push_back(roll);
  }
  if (tr.t.empty()) throw DataError(context + ": empty head-movement file");
  return tr;
}

HeadMovementTrace load_hm(const std::string& path) { return parse_hm(read_file(path), path); }

std::string format_hm(const HeadMovementTrace& tr) {
  std::string out = "t,yaw,pitch,roll\n";
  for (std::size_t i = 0; i < tr.size(); ++i)
    out += csv::fmt(tr.t[i]) + "," + csv::fmt(tr.yaw[i]) + "," + csv::fmt(tr.pitch[i]) + "," +
           csv::fmt(tr.roll[i]) + "\n";
  return out;
}

HmSummary hm_stats(const HeadMovementTrace& tr) {
  if (tr.size() < 2) throw ValidationError("hm_stats: need at least 2 samples");
  HmSummary s;
  s.samples = tr.size();
  s.duration = tr.t.back() - tr.t.front();
  s.yaw = axis_speed(tr.yaw, tr.t, true);
  s.pitch = axis_speed(tr.pitch, tr.t, false);
  s.roll = axis_speed(tr.roll, tr.t, true);
  std::size_t within = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double y = wrap_degrees(tr.yaw[i]);
    int bin = static_cast<int>(std::floor((y + 180.0) / 10.0));
    bin = std::clamp(bin, 0, HmSummary::kYawBins - 1);
    s.yaw_histogram[static_cast<std::size_t>(bin)] += 1.0;
    if (std::abs(tr.pitch[i]) <= 30.0) ++within;
  }
  const double n = static_cast<double>(tr.size());
  for (double& h : s.yaw_histogram) {
    if (h > 0.0) ++s.occupied_yaw_bins;
    h /= n;
  }
  s.pitch_within_30 = static_cast<double>(within) / n;
  return s;
}

std::string format_hm_summary_csv(const std::vector<std::pair<std::string, HmSummary>>& rows) {
  std::string out =
      "sequence_id,samples,duration,yaw_speed_mean,yaw_speed_max,pitch_speed_mean,"
      "pitch_speed_max,roll_speed_mean,roll_speed_max,occupied_yaw_bins,pitch_within_30";
  for (int b = 0; b < HmSummary::kYawBins; ++b) out += ",yaw_bin_" + std::to_string(b);
  out += "\n";
  for (const auto& [id, s] : rows) {
    out += id + "," + std::to_string(s.samples) + "," + csv::fmt(s.duration) + "," +
           csv::fmt(s.yaw.mean) + "," + csv::fmt(s.yaw.max) + "," + csv::fmt(s.pitch.mean) + "," +
           csv::fmt(s.pitch.max) + "," + csv::fmt(s.roll.mean) + "," + csv::fmt(s.roll.max) + "," +
           std::to_string(s.occupied_yaw_bins) + "," + csv::fmt(s.pitch_within_30);
    for (double h : s.yaw_histogram) out += "," + csv::fmt(h);
    out += "\n";
  }
  return out;
}

}  // namespace avqa
