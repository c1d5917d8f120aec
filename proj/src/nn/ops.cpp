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

#include "avqa/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "avqa/error.hpp"

namespace avqa::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double* c, bool accumulate) {
  Eigen::Map<RowMat> cm(c, m, n);
  Eigen::Map<const RowMat> am(a, trans_a ? k : m, trans_a ? m : k);
  Eigen::Map<const RowMat> bm(b, trans_b ? n : k, trans_b ? k : n);
  if (!accumulate) cm.setZero();
  if (trans_a && trans_b) {
    cm.noalias() += am.transpose() * bm.transpose();
  } else if (trans_a) {
    cm.noalias() += am.transpose() * bm;
  } else if (trans_b) {
    cm.noalias() += am * bm.transpose();
  } else {
    cm.noalias() += am * bm;
  }
}

// ---------------------------------------------------------------------------

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& dy, const Tensor& x) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  return dx;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor softmax(const Tensor& x) {
  require(x.rank() >= 1, "softmax of a scalar");
  const int d = x.dim(-1);
  const std::size_t rows = x.size() / static_cast<std::size_t>(d);
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * d;
    double* out = y.data() + r * d;
    const double mx = *std::max_element(in, in + d);
    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < d; ++j) out[j] /= sum;
  }
  check_finite(y, "softmax");
  return y;
}

Tensor softmax_backward(const Tensor& dy, const Tensor& y) {
  const int d = y.dim(-1);
  const std::size_t rows = y.size() / static_cast<std::size_t>(d);
  Tensor dx(y.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* yr = y.data() + r * d;
    const double* gr = dy.data() + r * d;
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += gr[j] * yr[j];
    for (int j = 0; j < d; ++j) dx[r * d + j] = yr[j] * (gr[j] - s);
  }
  return dx;
}

Tensor maxpool2(const Tensor& x, MaxPoolCache* cache) {
  require(x.rank() == 4, "maxpool2 expects [N,C,H,W], got " + to_string(x.shape()));
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require(h % 2 == 0 && w % 2 == 0, "maxpool2 needs even H and W, got " + to_string(x.shape()));
  const int ho = h / 2, wo = w / 2;
  Tensor y({n, c, ho, wo});
  std::vector<std::size_t> arg(y.size());
  std::size_t o = 0;
  for (int p = 0; p < n * c; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * h * w;
    for (int i = 0; i < ho; ++i) {
      for (int j = 0; j < wo; ++j, ++o) {
        const std::size_t cand[4] = {
            base + static_cast<std::size_t>(2 * i) * w + 2 * j,
            base + static_cast<std::size_t>(2 * i) * w + 2 * j + 1,
            base + static_cast<std::size_t>(2 * i + 1) * w + 2 * j,
            base + static_cast<std::size_t>(2 * i + 1) * w + 2 * j + 1,
        };
        std::size_t best = cand[0];
        for (int q = 1; q < 4; ++q)
          if (x[cand[q]] > x[best]) best = cand[q];
        y[o] = x[best];
        arg[o] = best;
      }
    }
  }
  if (cache) {
    cache->input_shape = x.shape();
    cache->argmax = std::move(arg);
  }
  return y;
}

Tensor maxpool2_backward(const Tensor& dy, const MaxPoolCache& cache) {
  Tensor dx(cache.input_shape);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[cache.argmax[o]] += dy[o];
  return dx;
}

Tensor global_avg_pool(const Tensor& x) {
  require(x.rank() == 4, "global_avg_pool expects [N,C,H,W]");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor y({n, c});
  for (std::size_t p = 0; p < static_cast<std::size_t>(n) * c; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += x[p * hw + i];
    y[p] = s / static_cast<double>(hw);
  }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& dy, const Shape& input_shape) {
  Tensor dx(input_shape);
  const std::size_t hw = static_cast<std::size_t>(input_shape[2]) * input_shape[3];
  for (std::size_t p = 0; p < dy.size(); ++p) {
    const double g = dy[p] / static_cast<double>(hw);
    for (std::size_t i = 0; i < hw; ++i) dx[p * hw + i] = g;
  }
  return dx;
}

Tensor mean_rows(const Tensor& x) {
  require(x.rank() == 2 && x.dim(0) > 0, "mean_rows expects a non-empty [T,D]");
  const int t = x.dim(0), d = x.dim(1);
  Tensor y({1, d});
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] += x.at(i, j);
  y *= 1.0 / t;
  return y;
}

Tensor mean_rows_backward(const Tensor& dy, int rows) {
  const int d = dy.dim(-1);
  Tensor dx({rows, d});
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) dx.at(i, j) = dy[static_cast<std::size_t>(j)] / rows;
  return dx;
}

Tensor sinusoidal_positions(int length, int dim) {
  Tensor pe({length, dim});
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < dim; i += 2) {
      const double rate = std::pow(10000.0, -static_cast<double>(i) / dim);
      pe.at(t, i) = std::sin(t * rate);
      if (i + 1 < dim) pe.at(t, i + 1) = std::cos(t * rate);
    }
  }
  return pe;
}

// ---------------------------------------------------------------------------

Linear::Linear(std::string name, int in, int out) : name_(std::move(name)), in_(in), out_(out) {}

void Linear::declare(ParamStore& ps, Rng& rng) const {
  kaiming_uniform(ps.add(weight_name(), {out_, in_}), in_, rng);
  ps.add(bias_name(), {out_});
}

Tensor Linear::forward(const ParamStore& ps, const Tensor& x) const {
  require(x.rank() >= 1 && x.dim(-1) == in_,
          name_ + ": expected last dim " + std::to_string(in_) + ", got " + to_string(x.shape()));
  const int rows = static_cast<int>(x.size() / static_cast<std::size_t>(in_));
  Shape out_shape = x.shape();
  out_shape.back() = out_;
  Tensor y(out_shape);
  gemm(false, true, rows, out_, in_, x.data(), ps.value(weight_name()).data(), y.data(), false);
  const Tensor& b = ps.value(bias_name());
  for (int r = 0; r < rows; ++r)
    for (int o = 0; o < out_; ++o) y[static_cast<std::size_t>(r) * out_ + o] += b[o];
  check_finite(y, name_);
  return y;
}

Tensor Linear::backward(ParamStore& ps, const Tensor& dy, const Tensor& x) const {
  const int rows = static_cast<int>(x.size() / static_cast<std::size_t>(in_));
  Tensor dx(x.shape());
  gemm(false, false, rows, in_, out_, dy.data(), ps.value(weight_name()).data(), dx.data(), false);
  gemm(true, false, out_, in_, rows, dy.data(), x.data(), ps.grad(weight_name()).data(), true);
  Tensor& db = ps.grad(bias_name());
  for (int r = 0; r < rows; ++r)
    for (int o = 0; o < out_; ++o) db[static_cast<std::size_t>(o)] += dy[static_cast<std::size_t>(r) * out_ + o];
  return dx;
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
               int pad)
    : name_(std::move(name)),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(pad) {}

void Conv2d::declare(ParamStore& ps, Rng& rng) const {
  kaiming_uniform(ps.add(weight_name(), {out_, in_, k_, k_}), in_ * k_ * k_, rng);
  ps.add(bias_name(), {out_});
}

Tensor Conv2d::forward(const ParamStore& ps, const Tensor& x, Conv2dCache* cache) const {
  require(x.rank() == 4 && x.dim(1) == in_,
          name_ + ": expected [N," + std::to_string(in_) + ",H,W], got " + to_string(x.shape()));
  const Tensor& w = ps.value(weight_name());
  require(w.shape() == Shape({out_, in_, k_, k_}), name_ + ": weight shape mismatch");
  const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
  require(h + 2 * pad_ >= k_ && wd + 2 * pad_ >= k_,
          name_ + ": input " + to_string(x.shape()) + " smaller than kernel");
  const int ho = (h + 2 * pad_ - k_) / stride_ + 1;
  const int wo = (wd + 2 * pad_ - k_) / stride_ + 1;
  const int ck = in_ * k_ * k_;
  const std::size_t spatial = static_cast<std::size_t>(ho) * wo;
  std::vector<double> cols(static_cast<std::size_t>(n) * ck * spatial, 0.0);
  Tensor y({n, out_, ho, wo});
  const Tensor& b = ps.value(bias_name());
  for (int s = 0; s < n; ++s) {
    double* col = cols.data() + static_cast<std::size_t>(s) * ck * spatial;
    const double* xs = x.data() + static_cast<std::size_t>(s) * in_ * h * wd;
    for (int c = 0; c < in_; ++c) {
      for (int i = 0; i < k_; ++i) {
        for (int j = 0; j < k_; ++j) {
          double* row = col + static_cast<std::size_t>((c * k_ + i) * k_ + j) * spatial;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride_ - pad_ + i;
            if (iy < 0 || iy >= h) continue;
            const double* xrow = xs + (static_cast<std::size_t>(c) * h + iy) * wd;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride_ - pad_ + j;
              if (ix >= 0 && ix < wd) row[static_cast<std::size_t>(oy) * wo + ox] = xrow[ix];
            }
          }
        }
      }
    }
    double* ys = y.data() + static_cast<std::size_t>(s) * out_ * spatial;
    gemm(false, false, out_, static_cast<int>(spatial), ck, w.data(), col, ys, false);
    for (int o = 0; o < out_; ++o)
      for (std::size_t p = 0; p < spatial; ++p) ys[o * spatial + p] += b[static_cast<std::size_t>(o)];
  }
  check_finite(y, name_);
  if (cache) {
    cache->input_shape = x.shape();
    cache->cols = std::move(cols);
  }
  return y;
}

Tensor Conv2d::backward(ParamStore& ps, const Tensor& dy, const Conv2dCache& cache) const {
  const int n = cache.input_shape[0], h = cache.input_shape[2], wd = cache.input_shape[3];
  const int ho = dy.dim(2), wo = dy.dim(3);
  const int ck = in_ * k_ * k_;
  const std::size_t spatial = static_cast<std::size_t>(ho) * wo;
  const Tensor& w = ps.value(weight_name());
  Tensor& dw = ps.grad(weight_name());
  Tensor& db = ps.grad(bias_name());
  Tensor dx(cache.input_shape);
  std::vector<double> dcol(static_cast<std::size_t>(ck) * spatial);
  for (int s = 0; s < n; ++s) {
    const double* dys = dy.data() + static_cast<std::size_t>(s) * out_ * spatial;
    const double* col = cache.cols.data() + static_cast<std::size_t>(s) * ck * spatial;
    gemm(false, true, out_, ck, static_cast<int>(spatial), dys, col, dw.data(), true);
    for (int o = 0; o < out_; ++o) {
      double acc = 0.0;
      for (std::size_t p = 0; p < spatial; ++p) acc += dys[o * spatial + p];
      db[static_cast<std::size_t>(o)] += acc;
    }
    gemm(true, false, ck, static_cast<int>(spatial), out_, w.data(), dys, dcol.data(), false);
    double* dxs = dx.data() + static_cast<std::size_t>(s) * in_ * h * wd;
    for (int c = 0; c < in_; ++c) {
      for (int i = 0; i < k_; ++i) {
        for (int j = 0; j < k_; ++j) {
          const double* row = dcol.data() + static_cast<std::size_t>((c * k_ + i) * k_ + j) * spatial;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride_ - pad_ + i;
            if (iy < 0 || iy >= h) continue;
            double* xrow = dxs + (static_cast<std::size_t>(c) * h + iy) * wd;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride_ - pad_ + j;
              if (ix >= 0 && ix < wd) xrow[ix] += row[static_cast<std::size_t>(oy) * wo + ox];
            }
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------

LayerNorm::LayerNorm(std::string name, int dim) : name_(std::move(name)), dim_(dim) {}

void LayerNorm::declare(ParamStore& ps) const {
  ps.add(name_ + ".gamma", {dim_}).fill(1.0);
  ps.add(name_ + ".beta", {dim_});
}

Tensor LayerNorm::forward(const ParamStore& ps, const Tensor& x, LayerNormCache* cache) const {
  require(x.rank() >= 1 && x.dim(-1) == dim_, name_ + ": dim mismatch " + to_string(x.shape()));
  const Tensor& g = ps.value(name_ + ".gamma");
  const Tensor& b = ps.value(name_ + ".beta");
  const std::size_t rows = x.size() / static_cast<std::size_t>(dim_);
  Tensor y(x.shape());
  Tensor xhat(x.shape());
  std::vector<double> inv(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * dim_;
    double mean = 0.0;
    for (int j = 0; j < dim_; ++j) mean += in[j];
    mean /= dim_;
    double var = 0.0;
    for (int j = 0; j < dim_; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= dim_;
    inv[r] = 1.0 / std::sqrt(var + kEps);
    for (int j = 0; j < dim_; ++j) {
      const double xh = (in[j] - mean) * inv[r];
      xhat[r * dim_ + j] = xh;
      y[r * dim_ + j] = xh * g[static_cast<std::size_t>(j)] + b[static_cast<std::size_t>(j)];
    }
  }
  check_finite(y, name_);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv);
  }
  return y;
}

Tensor LayerNorm::backward(ParamStore& ps, const Tensor& dy, const LayerNormCache& cache) const {
  const Tensor& g = ps.value(name_ + ".gamma");
  Tensor& dg = ps.grad(name_ + ".gamma");
  Tensor& db = ps.grad(name_ + ".beta");
  const std::size_t rows = dy.size() / static_cast<std::size_t>(dim_);
  Tensor dx(dy.shape());
  std::vector<double> dxhat(static_cast<std::size_t>(dim_));
  for (std::size_t r = 0; r < rows; ++r) {
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const std::size_t i = r * dim_ + j;
      dg[static_cast<std::size_t>(j)] += dy[i] * cache.xhat[i];
      db[static_cast<std::size_t>(j)] += dy[i];
      dxhat[static_cast<std::size_t>(j)] = dy[i] * g[static_cast<std::size_t>(j)];
      mean_dxhat += dxhat[static_cast<std::size_t>(j)];
      mean_dxhat_xhat += dxhat[static_cast<std::size_t>(j)] * cache.xhat[i];
    }
    mean_dxhat /= dim_;
    mean_dxhat_xhat /= dim_;
    for (int j = 0; j < dim_; ++j) {
      const std::size_t i = r * dim_ + j;
      dx[i] = cache.inv_std[r] *
              (dxhat[static_cast<std::size_t>(j)] - mean_dxhat - cache.xhat[i] * mean_dxhat_xhat);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------

MultiHeadAttention::MultiHeadAttention(std::string name, int dim, int heads)
    : name_(name),
      dim_(dim),
      heads_(heads),
      wq_(name + ".q", dim, dim),
      wk_(name + ".k", dim, dim),
      wv_(name + ".v", dim, dim),
      wo_(name + ".out", dim, dim) {
  require(heads > 0 && dim % heads == 0,
          name + ": dim " + std::to_string(dim) + " not divisible by heads " + std::to_string(heads));
}

void MultiHeadAttention::declare(ParamStore& ps, Rng& rng) const {
  wq_.declare(ps, rng);
  wk_.declare(ps, rng);
  wv_.declare(ps, rng);
  wo_.declare(ps, rng);
}

Tensor MultiHeadAttention::forward(const ParamStore& ps, const Tensor& q_in, const Tensor& kv_in,
                                   AttentionCache* cache) const {
  require(q_in.rank() == 2 && kv_in.rank() == 2 && q_in.dim(1) == dim_ && kv_in.dim(1) == dim_,
          name_ + ": token matrices must be [T," + std::to_string(dim_) + "], got " +
              to_string(q_in.shape()) + " and " + to_string(kv_in.shape()));
  require(kv_in.dim(0) >= 1, name_ + ": empty key/value set");
  const int tq = q_in.dim(0), tk = kv_in.dim(0);
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor q = wq_.forward(ps, q_in);
  Tensor k = wk_.forward(ps, kv_in);
  Tensor v = wv_.forward(ps, kv_in);
  Tensor concat({tq, dim_});
  std::vector<Tensor> attn;
  attn.reserve(static_cast<std::size_t>(heads_));
  for (int h = 0; h < heads_; ++h) {
    Tensor s({tq, tk});
    for (int i = 0; i < tq; ++i)
      for (int j = 0; j < tk; ++j) {
        double acc = 0.0;
        for (int d = 0; d < dh; ++d) acc += q.at(i, h * dh + d) * k.at(j, h * dh + d);
        s.at(i, j) = acc * scale;
      }
    Tensor a = softmax(s);
    for (int i = 0; i < tq; ++i)
      for (int d = 0; d < dh; ++d) {
        double acc = 0.0;
        for (int j = 0; j < tk; ++j) acc += a.at(i, j) * v.at(j, h * dh + d);
        concat.at(i, h * dh + d) = acc;
      }
    attn.push_back(std::move(a));
  }
  Tensor y = wo_.forward(ps, concat);
  if (cache) {
    cache->q_in = q_in;
    cache->kv_in = kv_in;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn);
    cache->concat = std::move(concat);
  }
  return y;
}

AttentionGrad MultiHeadAttention::backward(ParamStore& ps, const Tensor& dy,
                                           const AttentionCache& c) const {
  const int tq = c.q.dim(0), tk = c.k.dim(0);
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor d_concat = wo_.backward(ps, dy, c.concat);
  Tensor dq({tq, dim_}), dk({tk, dim_}), dv({tk, dim_});
  for (int h = 0; h < heads_; ++h) {
    const Tensor& a = c.attn[static_cast<std::size_t>(h)];
    Tensor da({tq, tk});
    for (int i = 0; i < tq; ++i)
      for (int j = 0; j < tk; ++j) {
        double acc = 0.0;
        for (int d = 0; d < dh; ++d) acc += d_concat.at(i, h * dh + d) * c.v.at(j, h * dh + d);
        da.at(i, j) = acc;
      }
    for (int j = 0; j < tk; ++j)
      for (int d = 0; d < dh; ++d) {
        double acc = 0.0;
        for (int i = 0; i < tq; ++i) acc += a.at(i, j) * d_concat.at(i, h * dh + d);
        dv.at(j, h * dh + d) = acc;
      }
    Tensor ds = softmax_backward(da, a);
    for (int i = 0; i < tq; ++i)
      for (int d = 0; d < dh; ++d) {
        double acc = 0.0;
        for (int j = 0; j < tk; ++j) acc += ds.at(i, j) * c.k.at(j, h * dh + d);
        dq.at(i, h * dh + d) = acc * scale;
      }
    for (int j = 0; j < tk; ++j)
      for (int d = 0; d < dh; ++d) {
        double acc = 0.0;
        for (int i = 0; i < tq; ++i) acc += ds.at(i, j) * c.q.at(i, h * dh + d);
        dk.at(j, h * dh + d) = acc * scale;
      }
  }
  AttentionGrad g;
  g.d_q_in = wq_.backward(ps, dq, c.q_in);
  g.d_kv_in = wk_.backward(ps, dk, c.kv_in);
  g.d_kv_in += wv_.backward(ps, dv, c.kv_in);
  return g;
}

// ---------------------------------------------------------------------------

FeedForward::FeedForward(std::string name, int dim, int hidden)
    : up_(name + ".up", dim, hidden), down_(name + ".down", hidden, dim) {}

void FeedForward::declare(ParamStore& ps, Rng& rng) const {
  up_.declare(ps, rng);
  down_.declare(ps, rng);
}

Tensor FeedForward::forward(const ParamStore& ps, const Tensor& x, FeedForwardCache* cache) const {
  Tensor pre = up_.forward(ps, x);
  Tensor y = down_.forward(ps, relu(pre));
  if (cache) {
    cache->x = x;
    cache->hidden_pre = std::move(pre);
  }
  return y;
}

Tensor FeedForward::backward(ParamStore& ps, const Tensor& dy, const FeedForwardCache& c) const {
  const Tensor dh = down_.backward(ps, dy, relu(c.hidden_pre));
  return up_.backward(ps, relu_backward(dh, c.hidden_pre), c.x);
}

}  // namespace avqa::nn
