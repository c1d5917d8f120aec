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
#include "avqa/metrics.hpp"
#include "doctest.h"
#include "metric_oracles.hpp"
#include "support.hpp"

using namespace avqa;

namespace {

double sse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect agreement and reversal") {
  const std::vector<double> x{1, 2, 3};
  CHECK(plcc(x, x) == doctest::Approx(1.0));
  CHECK(srocc(x, x) == 1.0);
  CHECK(krocc(x, x) == 1.0);
  CHECK(rmse(x, x) == 0.0);
  CHECK(srocc(x, {3, 2, 1}) == -1.0);
  CHECK(krocc(x, {3, 2, 1}) == -1.0);
}

TEST_CASE("worked Kendall example") {
  CHECK(krocc({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("average ranks") {
  CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(average_ranks({7, 7, 7}) == std::vector<double>{2, 2, 2});
}

TEST_CASE("rank statistics match brute force on small tied vectors") {
  nn::Rng rng(99);
  int compared = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng.below(7));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(4));
      y[i] = static_cast<double>(rng.below(5));
    }
    const bool const_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool const_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (const_x || const_y) {
      CHECK_THROWS_AS(srocc(x, y), NumericError);
      CHECK_THROWS_AS(krocc(x, y), NumericError);
      continue;
    }
    CHECK(std::abs(srocc(x, y) - avqa::testing::spearman_oracle(x, y)) <= 1e-12);
    CHECK(std::abs(krocc(x, y) - avqa::testing::kendall_oracle(x, y)) <= 1e-12);
    ++compared;
  }
  CHECK(compared > 800);
}

TEST_CASE("rank statistics ignore monotone transforms") {
  nn::Rng rng(5);
  std::vector<double> x(30), y(30), fx(30);
  for (int i = 0; i < 30; ++i) {
    x[i] = rng.uniform(-2, 2);
    y[i] = x[i] + rng.normal();
    fx[i] = std::exp(3 * x[i]) + 7;
  }
  CHECK(srocc(fx, y) == srocc(x, y));
  CHECK(krocc(fx, y) == krocc(x, y));
}

TEST_CASE("correlation preconditions") {
  CHECK_THROWS_AS(plcc({1, 1, 1}, {1, 2, 3}), NumericError);
  CHECK_THROWS_AS(plcc({1, 2}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(srocc({1}, {1}), ValidationError);
}

TEST_CASE("logistic fit never does worse than simple candidates") {
  const std::vector<double> mos{12, 25, 31, 47, 52, 66, 71, 88};
  const LogisticFit fit = logistic_fit(mos, mos);
  const double mean = [&] {
    double s = 0;
    for (double m : mos) s += m;
    return s / mos.size();
  }();
  CHECK(fit.sse <= sse(std::vector<double>(mos.size(), mean), mos) + 1e-9);
  CHECK(fit.sse <= logistic_sse(mos, mos, logistic_initial_params(mos, mos)) + 1e-9);
  CHECK(fit.sse == doctest::Approx(sse(fit.mapped, mos)));
}

TEST_CASE("logistic recovery from a known curve") {
  const LogisticParams truth{90, 10, 0.5, 0.1};
  nn::Rng rng(17);
  std::vector<double> x, y, clean;
  for (int i = 0; i < 60; ++i) {
    const double xi = rng.uniform(0, 1);
    x.push_back(xi);
    clean.push_back(logistic4(xi, truth));
    y.push_back(clean.back() + 0.5 * rng.normal());
  }
  const LogisticFit fit = logistic_fit(x, y);
  CHECK(rmse(fit.mapped, clean) < 0.5);
  CHECK(fit.params.b4 > 0);
}

TEST_CASE("affine predictions reach unit PLCC") {
  std::vector<double> mos, pred;
  for (int i = 0; i < 20; ++i) {
    mos.push_back(5 + 4.5 * i);
    pred.push_back(0.02 * mos.back() - 0.3);
  }
  const LogisticFit fit = logistic_fit(pred, mos);
  CHECK(std::abs(plcc(fit.mapped, mos) - 1.0) <= 1e-6);
}

TEST_CASE("mapped predictions are monotone in the raw ones") {
  nn::Rng rng(8);
  std::vector<double> pred, mos;
  for (int i = 0; i < 25; ++i) {
    pred.push_back(rng.uniform(0, 1));
    mos.push_back(100 * pred.back() * pred.back() + 5 * rng.normal());
  }
  const LogisticFit fit = logistic_fit(pred, mos);
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j)
      if (pred[i] < pred[j]) CHECK(fit.mapped[i] <= fit.mapped[j]);
}

TEST_CASE("degenerate fits") {
  const LogisticFit flat = logistic_fit({1, 2, 3, 4, 5}, {50, 50, 50, 50, 50});
  CHECK(flat.degenerate);
  CHECK_FALSE(flat.warning.empty());
  CHECK(flat.mapped == std::vector<double>{1, 2, 3, 4, 5});
  CHECK_THROWS_AS(logistic_fit({1, 2, 3, 4}, {1, 2, 3, 4}), ValidationError);
}

TEST_CASE("nelder-mead finds a quadratic minimum") {
  const auto r = nelder_mead(
      [](const std::vector<double>& p) { return (p[0] - 3) * (p[0] - 3) + 10 * (p[1] + 1) * (p[1] + 1); },
      {0, 0}, {1, 1});
  CHECK(r.x[0] == doctest::Approx(3).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(-1).epsilon(1e-6));
}

TEST_CASE("report and csv") {
  std::vector<double> pred, mos;
  for (int i = 0; i < 10; ++i) {
    pred.push_back(i + 0.1 * (i % 3));
    mos.push_back(10 + 8 * i);
  }
  const MetricReport r = evaluate_predictions(pred, mos);
  CHECK(r.n == 10);
  CHECK(std::abs(r.plcc) <= 1.0);
  CHECK(r.srocc == 1.0);
  CHECK(r.rmse >= 0.0);
  const std::string csv = format_metric_csv(r);
  CHECK(csv.rfind("plcc,srocc,krocc,rmse,n,b1,b2,b3,b4\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("published reference constants") {
  CHECK(PublishedReference::kSrocc == 0.8245);
  CHECK(PublishedReference::kPlcc == 0.8590);
  CHECK(PublishedReference::kKrocc == 0.6436);
  CHECK(PublishedReference::kRmse == 0.5772);
}

}  // TEST_SUITE
