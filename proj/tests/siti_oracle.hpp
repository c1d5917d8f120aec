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

// Pixel-loop SI/TI reference: explicit Sobel kernels and textbook
// population standard deviation in long double.

#ifndef AVQA_TESTS_SITI_ORACLE_HPP_
#define AVQA_TESTS_SITI_ORACLE_HPP_

#include <cmath>
#include <vector>

namespace avqa::testing {

inline double stdev_oracle(const std::vector<long double>& xs) {
  long double mean = 0;
  for (auto x : xs) mean += x;
  mean /= xs.size();
  long double ss = 0;
  for (auto x : xs) ss += (x - mean) * (x - mean);
  return static_cast<double>(std::sqrt(ss / xs.size()));
}

inline double si_oracle(const std::vector<float>& f, int w, int h) {
  static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  std::vector<long double> mags;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      long double gx = 0, gy = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long double p = f[static_cast<std::size_t>((y + dy) * w + (x + dx))];
          gx += kx[dy + 1][dx + 1] * p;
          gy += ky[dy + 1][dx + 1] * p;
        }
      }
      mags.push_back(std::sqrt(gx * gx + gy * gy));
    }
  }
  return stdev_oracle(mags);
}

inline double ti_oracle(const std::vector<float>& a, const std::vector<float>& b) {
  std::vector<long double> d;
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back(static_cast<long double>(b[i]) - a[i]);
  return stdev_oracle(d);
}

}  // namespace avqa::testing

#endif  // AVQA_TESTS_SITI_ORACLE_HPP_
