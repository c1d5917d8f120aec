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

// Fixed op set with hand-written backward passes. Every layer reads its
// parameters from a ParamStore by name, records what backward needs in a
// cache, and accumulates parameter gradients into the store.

#ifndef AVQA_NN_OPS_HPP_
#define AVQA_NN_OPS_HPP_

#include <string>
#include <vector>

#include "avqa/nn/params.hpp"
#include "avqa/nn/tensor.hpp"

namespace avqa::nn {

// ---- parameter-free ops ----------------------------------------------------

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& dy, const Tensor& x);

double sigmoid(double x);

// Row-wise softmax over the last dimension, max-shifted.
Tensor softmax(const Tensor& x);
Tensor softmax_backward(const Tensor& dy, const Tensor& y);

struct MaxPoolCache {
  Shape input_shape;
  std::vector<std::size_t> argmax;
};
// 2x2, stride 2 on [N,C,H,W]; H and W must be even. Ties go to the first
// index in raster order.
Tensor maxpool2(const Tensor& x, MaxPoolCache* cache = nullptr);
Tensor maxpool2_backward(const Tensor& dy, const MaxPoolCache& cache);

// [N,C,H,W] -> [N,C]
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& dy, const Shape& input_shape);

// Mean over rows of a [T,D] tensor -> [1,D].
Tensor mean_rows(const Tensor& x);
Tensor mean_rows_backward(const Tensor& dy, int rows);

// Standard sinusoidal table [T,D].
Tensor sinusoidal_positions(int length, int dim);

// ---- parameterized layers --------------------------------------------------

class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in, int out);
  void declare(ParamStore& ps, Rng& rng) const;

  // x: [..., in] -> [..., out]
  Tensor forward(const ParamStore& ps, const Tensor& x) const;
  // Returns dx; accumulates weight/bias gradients.
  Tensor backward(ParamStore& ps, const Tensor& dy, const Tensor& x) const;

  int in() const { return in_; }
  int out() const { return out_; }
  std::string weight_name() const { return name_ + ".weight"; }
  std::string bias_name() const { return name_ + ".bias"; }

 private:
  std::string name_;
  int in_ = 0;
  int out_ = 0;
};

struct Conv2dCache {
  Shape input_shape;
  std::vector<double> cols;  // per sample [C*kh*kw, Ho*Wo], concatenated
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride = 1,
         int pad = 0);
  void declare(ParamStore& ps, Rng& rng) const;

  // Cross-correlation with zero padding. x: [N,C,H,W] -> [N,O,Ho,Wo] with
  // Ho = floor((H + 2 pad - k) / stride) + 1.
  Tensor forward(const ParamStore& ps, const Tensor& x, Conv2dCache* cache = nullptr) const;
  Tensor backward(ParamStore& ps, const Tensor& dy, const Conv2dCache& cache) const;

  std::string weight_name() const { return name_ + ".weight"; }
  std::string bias_name() const { return name_ + ".bias"; }
  int out_channels() const { return out_; }

 private:
  std::string name_;
  int in_ = 0;
  int out_ = 0;
  int k_ = 1;
  int stride_ = 1;
  int pad_ = 0;
};

struct LayerNormCache {
  Tensor xhat;
  std::vector<double> inv_std;
};

class LayerNorm {
 public:
  static constexpr double kEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(std::string name, int dim);
  void declare(ParamStore& ps) const;

  Tensor forward(const ParamStore& ps, const Tensor& x, LayerNormCache* cache = nullptr) const;
  Tensor backward(ParamStore& ps, const Tensor& dy, const LayerNormCache& cache) const;

 private:
  std::string name_;
  int dim_ = 0;
};

struct AttentionCache {
  Tensor q_in, kv_in;
  Tensor q, k, v;           // projected, [Tq,D] / [Tk,D]
  std::vector<Tensor> attn;  // per head [Tq,Tk]
  Tensor concat;            // [Tq,D]
};

struct AttentionGrad {
  Tensor d_q_in;
  Tensor d_kv_in;
};

// softmax(Q K^T / sqrt(d_head)) V per head, heads concatenated, then an
// output projection. Unmasked. Inputs are token matrices [T,D].
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::string name, int dim, int heads);
  void declare(ParamStore& ps, Rng& rng) const;

  Tensor forward(const ParamStore& ps, const Tensor& q_in, const Tensor& kv_in,
                 AttentionCache* cache = nullptr) const;
  AttentionGrad backward(ParamStore& ps, const Tensor& dy, const AttentionCache& cache) const;

  int heads() const { return heads_; }

 private:
  std::string name_;
  int dim_ = 0;
  int heads_ = 1;
  Linear wq_, wk_, wv_, wo_;
};

struct FeedForwardCache {
  Tensor x, hidden_pre;
};

// Linear(dim, hidden) -> ReLU -> Linear(hidden, dim).
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(std::string name, int dim, int hidden);
  void declare(ParamStore& ps, Rng& rng) const;

  Tensor forward(const ParamStore& ps, const Tensor& x, FeedForwardCache* cache = nullptr) const;
  Tensor backward(ParamStore& ps, const Tensor& dy, const FeedForwardCache& cache) const;

 private:
  Linear up_, down_;
};

// Row-major GEMM helper: C (+)= op(A) * op(B). Dimensions are those of the
// operands after the optional transposes.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double* c, bool accumulate);

}  // namespace avqa::nn

#endif  // AVQA_NN_OPS_HPP_
