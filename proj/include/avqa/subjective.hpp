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

// Subjective score processing: questionnaire-based session exclusion,
// BT.500 Annex-2 subject screening (beta2 kurtosis test) and per-sequence
// MOS with 95% confidence intervals.

#ifndef AVQA_SUBJECTIVE_HPP_
#define AVQA_SUBJECTIVE_HPP_

#include <map>
#include <string>
#include <vector>

#include "avqa/manifest.hpp"

namespace avqa {

// Drops every record whose session was flagged by the sickness
// questionnaire. Appends a warning when nothing survives.
std::vector<RatingRecord> exclude_ssq(const std::vector<RatingRecord>& records,
                                      std::vector<std::string>* warnings = nullptr);

struct ScreeningParams {
  // Subject rejected iff (P+Q)/N > outlier_ratio and |P-Q|/(P+Q) < balance_ratio.
  double outlier_ratio = 0.05;
  double balance_ratio = 0.3;
  // beta2 window within which the distribution is treated as normal.
  double normal_kurtosis_lo = 2.0;
  double normal_kurtosis_hi = 4.0;
};

struct SubjectScreeningResult {
  std::string subject_id;
  std::map<std::string, double> kurtosis_per_sequence;
  int n_scores = 0;
  int p_count = 0;
  int q_count = 0;
  bool rejected = false;
};

struct ScreeningOutcome {
  std::vector<SubjectScreeningResult> subjects;  // sorted by subject_id
  std::vector<RatingRecord> kept;                // input order preserved
  std::vector<std::string> rejected_subjects() const;
};

// Non-excess kurtosis m4/m2^2 (population moments). Returns 3 for a
// zero-variance sample.
double kurtosis_beta2(const std::vector<double>& xs);

// One screening pass over the whole table. Throws ValidationError when
// fewer than two subjects or sequences are present, or when any sequence
// is rated by fewer than two subjects.
ScreeningOutcome screen_subjects(const std::vector<RatingRecord>& records,
                                 const ScreeningParams& params = {});

inline constexpr int kMinValidRatings = 15;

struct MOSRecord {
  std::string sequence_id;
  double mos = 0.0;
  double std = 0.0;  // sample standard deviation
  int n_valid = 0;
  double ci95_half_width = 0.0;
  bool below_min_ratings = false;  // n_valid < kMinValidRatings
};

// Sequences come out sorted by id. `expected_sequences`, when given, must
// each have at least one valid score (DataError otherwise).
std::vector<MOSRecord> compute_mos(const std::vector<RatingRecord>& records,
                                   const std::vector<std::string>& expected_sequences = {});

std::string format_mos_csv(const std::vector<MOSRecord>& mos);
std::vector<MOSRecord> parse_mos_csv(std::string_view text);

}  // namespace avqa

#endif  // AVQA_SUBJECTIVE_HPP_
