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

#include <cmath>
#include <numbers>

#include "avqa/erp.hpp"
#include "avqa/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace avqa;
using avqa::testing::random_tensor;

namespace {

std::vector<BandRange> ranges(int h, int m) { return partition_erp(h, m).bands; }

}  // namespace

TEST_SUITE("erp") {

TEST_CASE("partition examples") {
  CHECK(ranges(32, 4) == std::vector<BandRange>{{0, 8}, {8, 16}, {16, 24}, {24, 32}});
  const auto one = partition_erp(32, 1);
  CHECK(one.bands == std::vector<BandRange>{{0, 32}});
  CHECK(std::abs(one.band_latitude_centers[0]) <= 1e-15);
  CHECK(ranges(10, 3) == std::vector<BandRange>{{0, 4}, {4, 7}, {7, 10}});
  CHECK_THROWS_AS(partition_erp(4, 5), ValidationError);
  CHECK_THROWS_AS(partition_erp(4, 0), ValidationError);
}

TEST_CASE("partition tiles the rows for random sizes") {
  nn::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(300));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    const auto p = partition_erp(h, m);
    REQUIRE(p.num_bands() == m);
    int next = 0;
    int largest = 0, smallest = h;
    for (int b = 0; b < m; ++b) {
      CHECK(p.bands[b].row_start == next);
      next = p.bands[b].row_end;
      largest = std::max(largest, p.bands[b].rows());
      smallest = std::min(smallest, p.bands[b].rows());
      if (b > 0) CHECK(p.bands[b].rows() <= p.bands[b - 1].rows());
      CHECK(p.band_latitude_centers[b] < M_PI / 2);
      CHECK(p.band_latitude_centers[b] > -M_PI / 2);
    }
    CHECK(next == h);
    CHECK(largest - smallest <= 1);
  }
}

TEST_CASE("row latitude and band centres") {
  CHECK(row_latitude(0, 2) == doctest::Approx(M_PI / 4));
  CHECK(row_latitude(1, 2) == doctest::Approx(-M_PI / 4));
  const auto p = partition_erp(32, 4);
  // Band [0,8) has its middle at row 3.5 -> latitude pi/2 - pi*4/32.
  CHECK(p.band_latitude_centers[0] == doctest::Approx(M_PI / 2 - M_PI * 4.0 / 32.0));
}

TEST_CASE("cos-latitude prior") {
  CHECK(cos_latitude_prior(partition_erp(32, 1)) == std::vector<double>{1.0});
  const auto two = cos_latitude_prior(partition_erp(32, 2));
  CHECK(two[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(0.5).epsilon(1e-12));

  const auto four = cos_latitude_prior(partition_erp(32, 4));
  std::vector<double> oracle(4, 0.0);
  double total = 0.0;
  for (int r = 0; r < 32; ++r) {
    const double c = std::cos(M_PI / 2 - M_PI * (r + 0.5) / 32);
    oracle[static_cast<std::size_t>(r / 8)] += c;
    total += c;
  }
  for (int b = 0; b < 4; ++b) CHECK(four[b] == doctest::Approx(oracle[b] / total).epsilon(1e-12));
  CHECK(four[0] < four[1]);
  CHECK(four[3] < four[2]);
  CHECK(four[0] == doctest::Approx(four[3]).epsilon(1e-12));
  CHECK(four[1] == doctest::Approx(four[2]).epsilon(1e-12));
}

TEST_CASE("prior is mirror symmetric") {
  for (int h : {7, 16, 33}) {
    for (int m = 1; m <= std::min(h, 6); ++m) {
      const auto p = partition_erp(h, m);
      // Only mirror-symmetric tilings can be compared band to band.
      bool symmetric = true;
      for (int b = 0; b < m; ++b)
        symmetric = symmetric && p.bands[b].rows() == p.bands[m - 1 - b].rows();
      if (!symmetric) continue;
      const auto w = cos_latitude_prior(p);
      for (int b = 0; b < m; ++b) CHECK(w[b] == doctest::Approx(w[m - 1 - b]).epsilon(1e-12));
    }
  }
}

TEST_CASE("latitude weights form a probability vector") {
  nn::Rng rng(3);
  const auto prior = cos_latitude_prior(partition_erp(32, 4));
  for (int t = 0; t < 50; ++t) {
    std::vector<double> logits(4);
    for (double& l : logits) l = rng.uniform(-5, 5);
    const auto w = make_latitude_weights(prior, logits);
    double sum = 0;
    for (double x : w.effective_weights) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  const auto zero = make_latitude_weights(prior, std::vector<double>(4, 0.0));
  for (int b = 0; b < 4; ++b) CHECK(zero.effective_weights[b] == doctest::Approx(prior[b]).epsilon(1e-12));
}

TEST_CASE("aggregation") {
  nn::Rng rng(4);
  const nn::Tensor f = random_tensor({3, 5}, rng);
  CHECK(aggregate_band_features({f, f, f}, {0.2, 0.3, 0.5}) == f);

  const nn::Tensor a = random_tensor({3, 5}, rng), b = random_tensor({3, 5}, rng);
  CHECK(aggregate_band_features({a, b}, {0.0, 1.0}) == b);

  const auto uniform = make_latitude_weights({0.25, 0.25, 0.25, 0.25}, {0, 0, 0, 0});
  std::vector<nn::Tensor> bands;
  for (int m = 0; m < 4; ++m) bands.push_back(random_tensor({2, 3}, rng));
  const auto out = aggregate_band_features(bands, uniform.effective_weights);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mean = (bands[0][i] + bands[1][i] + bands[2][i] + bands[3][i]) / 4.0;
    CHECK(out[i] == doctest::Approx(mean).epsilon(1e-12));
    double lo = 1e9, hi = -1e9;
    for (const auto& t : bands) lo = std::min(lo, t[i]), hi = std::max(hi, t[i]);
    CHECK(out[i] >= lo - 1e-12);
    CHECK(out[i] <= hi + 1e-12);
  }
  CHECK_THROWS_AS(aggregate_band_features({a, random_tensor({2, 5}, rng)}, {0.5, 0.5}),
                  ValidationError);
}

TEST_CASE("aggregation gradient") {
  nn::Rng rng(12);
  const auto prior = cos_latitude_prior(partition_erp(20, 3));
  std::vector<double> logits = {0.3, -0.7, 0.2};
  std::vector<nn::Tensor> bands;
  for (int m = 0; m < 3; ++m) bands.push_back(random_tensor({2, 4}, rng));
  const nn::Tensor c = random_tensor({2, 4}, rng);
  auto loss = [&] {
    return nn::dot(aggregate_band_features(bands, make_latitude_weights(prior, logits).effective_weights), c);
  };
  const auto g = aggregate_band_features_backward(c, bands, make_latitude_weights(prior, logits));
  nn::Tensor lt({3}, logits);
  const nn::Tensor dl({3}, g.d_logits);
  auto report = avqa::testing::check_gradient(lt, dl, [&] {
    logits = lt.vec();
    return loss();
  }, "logits");
  logits = lt.vec();
  for (int m = 0; m < 3; ++m)
    report.merge(avqa::testing::check_gradient(bands[static_cast<std::size_t>(m)], g.d_features[static_cast<std::size_t>(m)], loss, "band"));
  CHECK_MESSAGE(report.worst < 1e-6, report.where);
}

}  // TEST_SUITE
