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

// Shared helpers for the unit and acceptance suites.

#ifndef AVQA_TESTS_SUPPORT_HPP_
#define AVQA_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "avqa/nn/params.hpp"
#include "avqa/nn/tensor.hpp"

namespace avqa::testing {

inline nn::Tensor random_tensor(nn::Shape shape, nn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradReport {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;

  void merge(const GradReport& o) {
    if (o.worst > worst) {
      worst = o.worst;
      where = o.where;
    }
    checked += o.checked;
  }
};

// Central differences of `loss` with respect to every element of `x`,
// compared against `analytic` (same shape). `x` is restored afterwards.
inline GradReport check_gradient(nn::Tensor& x, const nn::Tensor& analytic,
                                 const std::function<double()>& loss, const std::string& label,
                                 double h = 1e-5) {
  GradReport r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss();
    x[i] = saved - h;
    const double down = loss();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double e = relative_error(analytic[i], numeric);
    if (e > r.worst) {
      r.worst = e;
      r.where = label + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic[i]) +
                " numeric " + std::to_string(numeric);
    }
    ++r.checked;
  }
  return r;
}

// Every parameter in `ps` against the gradients already accumulated in it.
inline GradReport check_param_gradients(nn::ParamStore& ps, const std::function<double()>& loss) {
  GradReport total;
  for (auto& [name, value] : ps.values()) {
    const nn::Tensor analytic = ps.grad(name);
    total.merge(check_gradient(value, analytic, loss, name));
  }
  return total;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("avqa_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace avqa::testing

#endif  // AVQA_TESTS_SUPPORT_HPP_
