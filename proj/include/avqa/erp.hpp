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

// Equirectangular geometry: latitude bands over ERP rows and the
// latitude-related weights used to fuse per-band features.

#ifndef AVQA_ERP_HPP_
#define AVQA_ERP_HPP_

#include <vector>

#include "avqa/nn/tensor.hpp"

namespace avqa {

struct BandRange {
  int row_start = 0;  // inclusive
  int row_end = 0;    // exclusive
  int rows() const { return row_end - row_start; }
  bool operator==(const BandRange&) const = default;
};

// Bands are ordered north to south and tile [0, height).
struct LatitudeBandPartition {
  int height = 0;
  std::vector<BandRange> bands;
  std::vector<double> band_latitude_centers;  // radians
  int num_bands() const { return static_cast<int>(bands.size()); }
};

// Latitude of the centre of pixel row r: pi/2 - pi*(r+0.5)/H.
double row_latitude(int row, int height);

// Near-equal bands; the height % M leftover rows go one each to the
// northernmost bands.
LatitudeBandPartition partition_erp(int height, int num_bands);

// Per-band sum of cos(latitude) over rows, normalized to sum to 1. This is
// proportional to the solid angle the band covers on the sphere.
std::vector<double> cos_latitude_prior(const LatitudeBandPartition& partition);

struct LatitudeWeights {
  std::vector<double> prior_weights;
  std::vector<double> learned_logits;
  std::vector<double> effective_weights;  // softmax(logits + log prior)
};

LatitudeWeights make_latitude_weights(const std::vector<double>& prior,
                                      const std::vector<double>& logits);

// Sum_m w[m] * features[m]. All features must share a shape.
nn::Tensor aggregate_band_features(const std::vector<nn::Tensor>& features,
                                   const std::vector<double>& weights);

struct AggregateGrad {
  std::vector<nn::Tensor> d_features;
  std::vector<double> d_logits;
};

// Backward of aggregate_band_features composed with the softmax that
// produces the effective weights from the learned logits.
AggregateGrad aggregate_band_features_backward(const nn::Tensor& d_out,
                                               const std::vector<nn::Tensor>& features,
                                               const LatitudeWeights& weights);

}  // namespace avqa

#endif  // AVQA_ERP_HPP_
