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

#include "avqa/subjective.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "avqa/error.hpp"
#include "csv.hpp"

namespace avqa {

std::vector<RatingRecord> exclude_ssq(const std::vector<RatingRecord>& records,
                                      std::vector<std::string>* warnings) {
  std::vector<RatingRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const RatingRecord& r) { return !r.ssq_flag; });
  if (out.empty() && !records.empty() && warnings != nullptr) {
    warnings->push_back("all " + std::to_string(records.size()) +
                        " ratings excluded by SSQ flag");
  }
  return out;
}

std::vector<std::string> ScreeningOutcome::rejected_subjects() const {
  std::vector<std::string> ids;
  for (const auto& s : subjects)
    if (s.rejected) ids.push_back(s.subject_id);
  return ids;
}

double kurtosis_beta2(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 3.0;
  return m4 / (m2 * m2);
}

ScreeningOutcome screen_subjects(const std::vector<RatingRecord>& records,
                                 const ScreeningParams& params) {
  std::map<std::string, std::vector<double>> by_sequence;
  std::set<std::string> subjects;
  for (const auto& r : records) {
    by_sequence[r.sequence_id].push_back(r.score);
    subjects.insert(r.subject_id);
  }
  if (subjects.size() < 2) throw ValidationError("screening needs at least 2 subjects");
  if (by_sequence.size() < 2) throw ValidationError("screening needs at least 2 sequences");

  struct SeqStats {
    double mean, sd, beta2, k;
  };
  std::map<std::string, SeqStats> stats;
  for (const auto& [id, xs] : by_sequence) {
    if (xs.size() < 2) {
      throw ValidationError("sequence '" + id + "' rated by fewer than 2 subjects");
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    const double b2 = kurtosis_beta2(xs);
    const bool normal = b2 >= params.normal_kurtosis_lo && b2 <= params.normal_kurtosis_hi;
    stats[id] = {mean, sd, b2, normal ? 2.0 : std::sqrt(20.0)};
  }

  std::map<std::string, SubjectScreeningResult> per_subject;
  for (const auto& r : records) {
    auto& s = per_subject[r.subject_id];
    s.subject_id = r.subject_id;
    const SeqStats& st = stats.at(r.sequence_id);
    s.kurtosis_per_sequence[r.sequence_id] = st.beta2;
    ++s.n_scores;
    if (r.score > st.mean + st.k * st.sd) ++s.p_count;
    if (r.score < st.mean - st.k * st.sd) ++s.q_count;
  }

  ScreeningOutcome out;
  std::set<std::string> rejected;
  for (auto& [id, s] : per_subject) {
    const int pq = s.p_count + s.q_count;
    if (pq > 0) {
      const double ratio = static_cast<double>(pq) / s.n_scores;
      const double balance = std::abs(s.p_count - s.q_count) / static_cast<double>(pq);
      s.rejected = ratio > params.outlier_ratio && balance < params.balance_ratio;
    }
    if (s.rejected) rejected.insert(id);
    out.subjects.push_back(std::move(s));
  }
  for (const auto& r : records) {
    if (!rejected.count(r.subject_id)) out.kept.push_back(r);
  }
  return out;
}

std::vector<MOSRecord> compute_mos(const std::vector<RatingRecord>& records,
                                   const std::vector<std::string>& expected_sequences) {
  std::map<std::string, std::vector<double>> by_sequence;
  for (const auto& r : records) by_sequence[r.sequence_id].push_back(r.score);
  for (const auto& id : expected_sequences) {
    if (!by_sequence.count(id)) {
      throw DataError("sequence '" + id + "' has zero valid scores");
    }
  }
  std::vector<MOSRecord> out;
  out.reserve(by_sequence.size());
  for (const auto& [id, xs] : by_sequence) {
    MOSRecord m;
    m.sequence_id = id;
    m.n_valid = static_cast<int>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mos = sum / m.n_valid;
    if (m.n_valid > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - m.mos) * (x - m.mos);
      m.std = std::sqrt(ss / (m.n_valid - 1));
    }
    m.ci95_half_width = 1.96 * m.std / std::sqrt(static_cast<double>(m.n_valid));
    m.below_min_ratings = m.n_valid < kMinValidRatings;
    out.push_back(std::move(m));
  }
  return out;
}

std::string format_mos_csv(const std::vector<MOSRecord>& mos) {
  std::string out = "sequence_id,mos,std,n_valid,ci95_half_width\n";
  for (const auto& m : mos) {
    out += m.sequence_id + "," + csv::fmt(m.mos) + "," + csv::fmt(m.std) + "," +
           std::to_string(m.n_valid) + "," + csv::fmt(m.ci95_half_width) + "\n";
  }
  return out;
}

std::vector<MOSRecord> parse_mos_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines[0] != "sequence_id,mos,std,n_valid,ci95_half_width") {
    throw DataError("MOS table: header must be sequence_id,mos,std,n_valid,ci95_half_width");
  }
  std::vector<MOSRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = "MOS table line " + std::to_string(i + 1);
    const auto f = csv::split_line(lines[i]);
    if (f.size() != 5) throw DataError(ctx + ": expected 5 fields");
    MOSRecord m;
    m.sequence_id = f[0];
    m.mos = csv::to_double(f[1], ctx);
    m.std = csv::to_double(f[2], ctx);
    m.n_valid = static_cast<int>(csv::to_int(f[3], ctx));
    m.ci95_half_width = csv::to_double(f[4], ctx);
    m.below_min_ratings = m.n_valid < kMinValidRatings;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace avqa
