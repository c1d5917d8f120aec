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

// Evaluation metrics: 4-parameter logistic mapping followed by PLCC, SROCC,
// KROCC and RMSE.

#ifndef AVQA_METRICS_HPP_
#define AVQA_METRICS_HPP_

#include <functional>
#include <string>
#include <vector>

namespace avqa {

struct LogisticParams {
  double b1 = 0.0;  // upper asymptote
  double b2 = 0.0;  // lower asymptote
  double b3 = 0.0;  // midpoint
  double b4 = 1.0;  // slope scale, used as |b4|
};

// (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2
double logistic4(double x, const LogisticParams& p);

struct NelderMeadOptions {
  int max_iterations = 2000;
  double min_simplex_size = 1e-10;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

// Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
// `steps` sets the initial simplex offset along each axis.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opts = {});

struct LogisticFit {
  LogisticParams params;
  std::vector<double> mapped;
  double sse = 0.0;
  int iterations = 0;
  bool degenerate = false;  // constant MOS or predictions; mapped == pred
  std::string warning;
};

// Least-squares fit of logistic4 from pred to mos, started at
// b1=max(mos), b2=min(mos), b3=median(pred), b4=std(pred)/4.
// Needs n >= 5.
LogisticFit logistic_fit(const std::vector<double>& pred, const std::vector<double>& mos,
                         const NelderMeadOptions& opts = {});
LogisticParams logistic_initial_params(const std::vector<double>& pred,
                                       const std::vector<double>& mos);
double logistic_sse(const std::vector<double>& pred, const std::vector<double>& mos,
                    const LogisticParams& p);

// Mean ranks, 1-based; tied values share the average of their ranks.
std::vector<double> average_ranks(const std::vector<double>& xs);

// Correlations throw NumericError on constant input and ValidationError on
// length mismatch or n < 2.
double plcc(const std::vector<double>& x, const std::vector<double>& y);
double srocc(const std::vector<double>& x, const std::vector<double>& y);
// Kendall tau-b, O(n log n).
double krocc(const std::vector<double>& x, const std::vector<double>& y);
double rmse(const std::vector<double>& x, const std::vector<double>& y);

struct MetricReport {
  double plcc = 0.0;
  double srocc = 0.0;
  double krocc = 0.0;
  double rmse = 0.0;
  LogisticParams logistic;
  int n = 0;
  bool degenerate_fit = false;
};

// PLCC and RMSE on logistic-mapped predictions; SROCC and KROCC on the raw
// predictions (rank statistics are unchanged by a monotone map).
MetricReport evaluate_predictions(const std::vector<double>& pred,
                                  const std::vector<double>& mos);

// `plcc,srocc,krocc,rmse,n,b1,b2,b3,b4`
std::string format_metric_csv(const MetricReport& r);

// Reference figures reported for the full model on the original dataset.
// Not reproducible here: the dataset and pretrained encoders are not public.
struct PublishedReference {
  static constexpr double kSrocc = 0.8245;
  static constexpr double kPlcc = 0.8590;
  static constexpr double kKrocc = 0.6436;
  static constexpr double kRmse = 0.5772;
};

}  // namespace avqa

#endif  // AVQA_METRICS_HPP_
