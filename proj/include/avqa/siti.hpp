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

// Spatial and temporal information (P.910 style) on luma frames.
//
// SI_n = population stdev over interior pixels of the Sobel magnitude of F_n
// (the one-pixel border is excluded, no padding).
// TI_n = population stdev over all pixels of F_n - F_{n-1}.

#ifndef AVQA_SITI_HPP_
#define AVQA_SITI_HPP_

#include <string>
#include <vector>

#include "avqa/manifest.hpp"

namespace avqa {

struct SITIResult {
  std::vector<double> si_per_frame;
  std::vector<double> ti_per_frame;  // length frames - 1
  double si_max = 0.0;
  double si_mean = 0.0;
  double ti_max = 0.0;
  double ti_mean = 0.0;
};

double spatial_information(const std::vector<float>& frame, int width, int height);
double temporal_information(const std::vector<float>& prev, const std::vector<float>& cur);

std::vector<double> spatial_information(const FrameSequence& seq);
std::vector<double> temporal_information(const FrameSequence& seq);

// TI summaries are zero for single-frame input.
SITIResult summarize_siti(const FrameSequence& seq);

struct SITIRow {
  std::string sequence_id;
  SITIResult result;
};

// `sequence_id,si_mean,si_max,ti_mean,ti_max`
std::string format_siti_csv(const std::vector<SITIRow>& rows);

}  // namespace avqa

#endif  // AVQA_SITI_HPP_
