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

#include "avqa/erp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avqa/error.hpp"

namespace avqa {

double row_latitude(int row, int height) {
  return std::numbers::pi / 2.0 - std::numbers::pi * (row + 0.5) / height;
}

LatitudeBandPartition partition_erp(int height, int num_bands) {
  if (height < 1) throw ValidationError("ERP height must be >= 1");
  if (num_bands < 1 || num_bands > height) {
    throw ValidationError("band count " + std::to_string(num_bands) + " outside [1, " +
                          std::to_string(height) + "]");
  }
  LatitudeBandPartition p;
  p.height = height;
  const int base = height / num_bands;
  const int extra = height % num_bands;
  int row = 0;
  for (int m = 0; m < num_bands; ++m) {
    const int rows = base + (m < extra ? 1 : 0);
    p.bands.push_back({row, row + rows});
    const double mid = 0.5 * (row + row + rows);
    p.band_latitude_centers.push_back(std::numbers::pi / 2.0 - std::numbers::pi * mid / height);
    row += rows;
  }
  return p;
}

std::vector<double> cos_latitude_prior(const LatitudeBandPartition& partition) {
  std::vector<double> w;
  w.reserve(partition.bands.size());
  double total = 0.0;
  for (const auto& b : partition.bands) {
    double s = 0.0;
    for (int r = b.row_start; r < b.row_end; ++r) s += std::cos(row_latitude(r, partition.height));
    w.push_back(s);
    total += s;
  }
  for (double& x : w) x /= total;
  return w;
}

LatitudeWeights make_latitude_weights(const std::vector<double>& prior,
                                      const std::vector<double>& logits) {
  if (prior.size() != logits.size() || prior.empty()) {
    throw ValidationError("latitude prior and logits differ in length");
  }
  LatitudeWeights w{prior, logits, std::vector<double>(prior.size())};
  double mx = -INFINITY;
  std::vector<double> z(prior.size());
  for (std::size_t m = 0; m < prior.size(); ++m) {
    if (!(prior[m] > 0.0)) throw ValidationError("latitude prior must be positive");
    z[m] = logits[m] + std::log(prior[m]);
    mx = std::max(mx, z[m]);
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < z.size(); ++m) {
    w.effective_weights[m] = std::exp(z[m] - mx);
    sum += w.effective_weights[m];
  }
  for (double& x : w.effective_weights) x /= sum;
  return w;
}

nn::Tensor aggregate_band_features(const std::vector<nn::Tensor>& features,
                                   const std::vector<double>& weights) {
  if (features.empty() || features.size() != weights.size()) {
    throw ValidationError("aggregate: need one weight per band feature");
  }
  nn::Tensor out(features[0].shape());
  for (std::size_t m = 0; m < features.size(); ++m) {
    if (features[m].shape() != out.shape()) {
      throw ValidationError("aggregate: band " + std::to_string(m) + " has shape " +
                            nn::to_string(features[m].shape()) + ", expected " +
                            nn::to_string(out.shape()));
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[m] * features[m][i];
  }
  return out;
}

AggregateGrad aggregate_band_features_backward(const nn::Tensor& d_out,
                                               const std::vector<nn::Tensor>& features,
                                               const LatitudeWeights& weights) {
  const auto& w = weights.effective_weights;
  AggregateGrad g;
  std::vector<double> inner(features.size());
  double weighted = 0.0;
  for (std::size_t m = 0; m < features.size(); ++m) {
    g.d_features.push_back(d_out * w[m]);
    inner[m] = nn::dot(d_out, features[m]);
    weighted += w[m] * inner[m];
  }
  g.d_logits.resize(features.size());
  for (std::size_t m = 0; m < features.size(); ++m) g.d_logits[m] = w[m] * (inner[m] - weighted);
  return g;
}

}  // namespace avqa
