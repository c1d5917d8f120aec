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

#include <algorithm>
#include <cmath>

#include "avqa/error.hpp"
#include "avqa/siti.hpp"
#include "doctest.h"
#include "siti_oracle.hpp"
#include "support.hpp"

using namespace avqa;

namespace {

FrameSequence constant_video(int w, int h, int n, float v) {
  FrameSequence s;
  s.width = w;
  s.height = h;
  s.frames.assign(static_cast<std::size_t>(n), std::vector<float>(static_cast<std::size_t>(w * h), v));
  return s;
}

FrameSequence random_video(int w, int h, int n, std::uint64_t seed) {
  nn::Rng rng(seed);
  FrameSequence s = constant_video(w, h, n, 0.0f);
  for (auto& f : s.frames)
    for (float& p : f) p = static_cast<float>(rng.below(256));
  return s;
}

}  // namespace

TEST_SUITE("siti") {

TEST_CASE("constant video has zero SI and TI") {
  const auto r = summarize_siti(constant_video(32, 16, 5, 117.0f));
  CHECK(r.si_mean == 0.0);
  CHECK(r.si_max == 0.0);
  CHECK(r.ti_mean == 0.0);
  CHECK(r.ti_max == 0.0);
  CHECK(r.ti_per_frame.size() == 4);
}

TEST_CASE("vertical step edge matches the pixel oracle") {
  FrameSequence s = constant_video(64, 64, 1, 0.0f);
  for (int y = 0; y < 64; ++y)
    for (int x = 32; x < 64; ++x) s.frames[0][static_cast<std::size_t>(y * 64 + x)] = 255.0f;
  const double si = spatial_information(s.frames[0], 64, 64);
  CHECK(si > 0.0);
  CHECK(std::abs(si - avqa::testing::si_oracle(s.frames[0], 64, 64)) <= 1e-9);
  // Interior: 62 columns, two of which carry |Gx| = 4 * 255.
  const double p = 2.0 / 62.0;
  CHECK(si == doctest::Approx(1020.0 * std::sqrt(p * (1 - p))).epsilon(1e-12));
}

TEST_CASE("random sequences match the oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = random_video(32, 32, 8, seed);
    const auto si = spatial_information(s);
    const auto ti = temporal_information(s);
    REQUIRE(ti.size() == 7);
    for (std::size_t i = 0; i < si.size(); ++i)
      CHECK(std::abs(si[i] - avqa::testing::si_oracle(s.frames[i], 32, 32)) <= 1e-9);
    for (std::size_t i = 0; i < ti.size(); ++i)
      CHECK(std::abs(ti[i] - avqa::testing::ti_oracle(s.frames[i], s.frames[i + 1])) <= 1e-9);
  }
}

TEST_CASE("TI corner cases") {
  FrameSequence alt = constant_video(8, 8, 4, 0.0f);
  for (std::size_t i = 1; i < 4; i += 2) std::fill(alt.frames[i].begin(), alt.frames[i].end(), 255.0f);
  for (double t : temporal_information(alt)) CHECK(t == 0.0);

  FrameSequence one = constant_video(10, 10, 2, 0.0f);
  one.frames[1][37] = 255.0f;
  const double expected = 255.0 * std::sqrt(99.0) / 100.0;
  CHECK(expected == doctest::Approx(25.37218).epsilon(1e-6));
  CHECK(std::abs(temporal_information(one)[0] - expected) <= 1e-12);

  CHECK_THROWS_AS(temporal_information(constant_video(8, 8, 1, 0.0f)), ValidationError);
  CHECK_THROWS_AS(spatial_information(std::vector<float>(4, 0.0f), 2, 2), ValidationError);
}

TEST_CASE("summaries") {
  const auto s = random_video(16, 8, 3, 9);
  const auto r = summarize_siti(s);
  CHECK(r.si_max >= r.si_mean);
  CHECK(r.ti_max >= r.ti_mean);
  CHECK(r.si_mean == doctest::Approx((r.si_per_frame[0] + r.si_per_frame[1] + r.si_per_frame[2]) / 3));
  const auto single = summarize_siti(constant_video(8, 8, 1, 3.0f));
  CHECK(single.ti_per_frame.empty());
  CHECK(single.ti_mean == 0.0);
}

TEST_CASE("offset and scale behaviour, time reversal") {
  const auto s = random_video(16, 16, 4, 3);
  FrameSequence shifted = s, scaled = s, reversed = s;
  for (auto& f : shifted.frames)
    for (float& p : f) p += 10.0f;
  for (auto& f : scaled.frames)
    for (float& p : f) p *= 2.0f;
  std::reverse(reversed.frames.begin(), reversed.frames.end());
  const auto si = spatial_information(s), si_s = spatial_information(shifted),
             si_x = spatial_information(scaled);
  for (std::size_t i = 0; i < si.size(); ++i) {
    CHECK(si_s[i] == doctest::Approx(si[i]).epsilon(1e-12));
    CHECK(si_x[i] == doctest::Approx(2.0 * si[i]).epsilon(1e-12));
  }
  const auto ti = temporal_information(s), ti_r = temporal_information(reversed);
  for (std::size_t i = 0; i < ti.size(); ++i)
    CHECK(ti_r[ti.size() - 1 - i] == doctest::Approx(ti[i]).epsilon(1e-12));
}

TEST_CASE("csv layout") {
  SITIRow row{"abc", summarize_siti(constant_video(8, 8, 2, 0.0f))};
  CHECK(format_siti_csv({row}) == "sequence_id,si_mean,si_max,ti_mean,ti_max\nabc,0,0,0,0\n");
}

}  // TEST_SUITE
