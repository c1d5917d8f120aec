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

#include "avqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "avqa/error.hpp"
#include "csv.hpp"

namespace avqa {

namespace {

void check_pair(const std::vector<double>& x, const std::vector<double>& y, const char* what) {
  if (x.size() != y.size()) throw ValidationError(std::string(what) + ": length mismatch");
  if (x.size() < 2) throw ValidationError(std::string(what) + ": need at least 2 samples");
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stdev_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Counts inversions of `v` while merge-sorting it in place.
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                           std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

template <typename Eq>
long long tied_pairs(std::size_t n, Eq&& same_as_prev) {
  long long total = 0;
  long long run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && same_as_prev(i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double logistic4(double x, const LogisticParams& p) {
  const double s = std::abs(p.b4);
  return (p.b1 - p.b2) / (1.0 + std::exp(-(x - p.b3) / s)) + p.b2;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[n];
    const std::size_t second = order[n - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d)
        size = std::max(size, std::abs(simplex[i][d] - simplex[best][d]));
    if (size < opts.min_simplex_size) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };

    std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d)
        simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
      fv[i] = f(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[best], fv[best], iter};
}

LogisticParams logistic_initial_params(const std::vector<double>& pred,
                                       const std::vector<double>& mos) {
  return {*std::max_element(mos.begin(), mos.end()), *std::min_element(mos.begin(), mos.end()),
          median_of(pred), stdev_of(pred) / 4.0};
}

double logistic_sse(const std::vector<double>& pred, const std::vector<double>& mos,
                    const LogisticParams& p) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = logistic4(pred[i], p) - mos[i];
    sse += e * e;
  }
  return sse;
}

LogisticFit logistic_fit(const std::vector<double>& pred, const std::vector<double>& mos,
                         const NelderMeadOptions& opts) {
  if (pred.size() != mos.size()) throw ValidationError("logistic_fit: length mismatch");
  if (pred.size() < 5) throw ValidationError("logistic_fit: need at least 5 samples");
  LogisticFit fit;
  const auto [mos_lo, mos_hi] = std::minmax_element(mos.begin(), mos.end());
  const double pred_sd = stdev_of(pred);
  if (*mos_lo == *mos_hi || pred_sd == 0.0) {
    fit.degenerate = true;
    fit.warning = *mos_lo == *mos_hi ? "constant MOS; logistic mapping skipped"
                                     : "constant predictions; logistic mapping skipped";
    fit.mapped = pred;
    fit.params = {};
    fit.sse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) fit.sse += (pred[i] - mos[i]) * (pred[i] - mos[i]);
    return fit;
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const LogisticParams init = logistic_initial_params(pred, mos);
  const double mos_range = *mos_hi - *mos_lo;
  auto objective = [&](const std::vector<double>& b) {
    if (b[3] == 0.0) return kInf;
    const double v = logistic_sse(pred, mos, {b[0], b[1], b[2], b[3]});
    return std::isfinite(v) ? v : kInf;
  };
  const NelderMeadResult r =
      nelder_mead(objective, {init.b1, init.b2, init.b3, init.b4},
                  {0.1 * mos_range, 0.1 * mos_range, 0.1 * pred_sd, 0.1 * pred_sd}, opts);
  fit.params = {r.x[0], r.x[1], r.x[2], std::abs(r.x[3])};
  fit.iterations = r.iterations;
  fit.sse = r.value;
  fit.mapped.reserve(pred.size());
  for (double p : pred) fit.mapped.push_back(logistic4(p, fit.params));
  return fit;
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double plcc(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y, "plcc");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double srocc(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y, "srocc");
  return plcc(average_ranks(x), average_ranks(y));
}

double krocc(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y, "krocc");
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long n1 = tied_pairs(n, [&](std::size_t i) { return x[idx[i]] == x[idx[i - 1]]; });
  const long long n3 = tied_pairs(n, [&](std::size_t i) {
    return x[idx[i]] == x[idx[i - 1]] && y[idx[i]] == y[idx[i - 1]];
  });
  std::vector<double> ys(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const long long swaps = count_inversions(ys, tmp, 0, n);
  const long long n2 = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (denom == 0.0) throw NumericError("correlation undefined for constant input");
  return static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps) / denom;
}

double rmse(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw ValidationError("rmse: length mismatch or empty");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

MetricReport evaluate_predictions(const std::vector<double>& pred,
                                  const std::vector<double>& mos) {
  const LogisticFit fit = logistic_fit(pred, mos);
  MetricReport r;
  r.n = static_cast<int>(pred.size());
  r.logistic = fit.params;
  r.degenerate_fit = fit.degenerate;
  r.plcc = plcc(fit.mapped, mos);
  r.srocc = srocc(pred, mos);
  r.krocc = krocc(pred, mos);
  r.rmse = rmse(fit.mapped, mos);
  return r;
}

std::string format_metric_csv(const MetricReport& r) {
  return "plcc,srocc,krocc,rmse,n,b1,b2,b3,b4\n" + csv::fmt(r.plcc) + "," + csv::fmt(r.srocc) +
         "," + csv::fmt(r.krocc) + "," + csv::fmt(r.rmse) + "," + std::to_string(r.n) + "," +
         csv::fmt(r.logistic.b1) + "," + csv::fmt(r.logistic.b2) + "," +
         csv::fmt(r.logistic.b3) + "," + csv::fmt(r.logistic.b4) + "\n";
}

}  // namespace avqa
