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

// Brute-force rank statistics used as references.

#ifndef AVQA_TESTS_METRIC_ORACLES_HPP_
#define AVQA_TESTS_METRIC_ORACLES_HPP_

#include <cmath>
#include <vector>

namespace avqa::testing {

// rank_i = 1 + #{j: x_j < x_i} + (#{j != i: x_j == x_i}) / 2
inline std::vector<double> counting_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, same = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (j != i && x[j] == x[i]) ++same;
    }
    r[i] = 1 + less + same / 2;
  }
  return r;
}

inline double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_oracle(counting_ranks(x), counting_ranks(y));
}

// Tau-b by enumerating every pair.
inline double kendall_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + tie_x) *
                                 static_cast<double>(concordant + discordant + tie_y));
  return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace avqa::testing

#endif  // AVQA_TESTS_METRIC_ORACLES_HPP_
