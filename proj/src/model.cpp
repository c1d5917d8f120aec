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

#include "avqa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avqa/error.hpp"
#include "avqa/nn/adam.hpp"

namespace avqa {

namespace {

using nn::Tensor;

constexpr double kBandConvInitScale = 2.0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

// 1-D exact overlap weights: output i covers [i*in/out, (i+1)*in/out).
struct Tap {
  int src;
  double w;
};

std::vector<std::vector<Tap>> area_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double start = i * scale;
    const double end = (i + 1) * scale;
    for (int j = static_cast<int>(std::floor(start)); j < in && j < end; ++j) {
      const double overlap = std::min(end, j + 1.0) - std::max(start, static_cast<double>(j));
      if (overlap > 0.0) taps[static_cast<std::size_t>(i)].push_back({j, overlap / scale});
    }
  }
  return taps;
}

Tensor scalar_tensor(double v) { return Tensor({1, 1}, {v}); }

Tensor int_tensor(const std::vector<int>& xs) {
  std::vector<double> d(xs.begin(), xs.end());
  return Tensor({static_cast<int>(xs.size())}, std::move(d));
}

}  // namespace

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kTransformer:
      return "transformer";
    case FusionMode::kCat:
      return "cat";
    case FusionMode::kAdd:
      return "add";
  }
  return "?";
}

FusionMode fusion_mode_from_string(std::string_view s) {
  if (s == "transformer") return FusionMode::kTransformer;
  if (s == "cat") return FusionMode::kCat;
  if (s == "add") return FusionMode::kAdd;
  throw ValidationError("unknown fusion mode '" + std::string(s) + "'");
}

void validate(const ModelConfig& c) {
  require(c.bands >= 1, "bands must be >= 1");
  require(!c.band_channels.empty(), "band_channels must not be empty");
  require(c.audio_channels.size() == 4, "audio CNN has exactly 4 conv stages");
  for (int ch : c.band_channels) require(ch >= 1, "band_channels must be positive");
  for (int ch : c.audio_channels) require(ch >= 1, "audio_channels must be positive");
  const int band_div = 1 << c.band_channels.size();
  require(c.band_input_height >= band_div && c.band_input_height % band_div == 0 &&
              c.band_input_width >= band_div && c.band_input_width % band_div == 0,
          "band input size must be a positive multiple of " + std::to_string(band_div));
  require(c.audio.patch_frames % 16 == 0 && c.audio.num_mel % 16 == 0 &&
              c.audio.patch_frames > 0 && c.audio.num_mel > 0,
          "audio patch dims must be positive multiples of 16");
  require(c.d_model >= 1 && c.heads >= 1 && c.d_model % c.heads == 0,
          "d_model must be divisible by heads");
  require(c.fusion_blocks >= 2 && c.fusion_blocks % 2 == 0,
          "fusion_blocks must be even and >= 2");
  require(c.ffn_mult >= 1, "ffn_mult must be >= 1");
  require(c.frames_per_clip >= 1, "frames_per_clip must be >= 1");
  require(c.lr > 0.0, "lr must be > 0");
  require(c.epochs >= 0, "epochs must be >= 0");
  require(c.batch_size >= 0, "batch_size must be >= 0");
}

std::vector<int> cross_attention_blocks(const ModelConfig& cfg) {
  std::vector<int> out;
  for (int b = 1; b < cfg.fusion_blocks; b += 2) out.push_back(b);
  return out;
}

// ---------------------------------------------------------------------------
// Preprocessing

std::vector<int> sample_frame_indices(int available, int count) {
  require(count >= 1, "frame count must be >= 1");
  require(count <= available, "requested " + std::to_string(count) + " frames but only " +
                                  std::to_string(available) + " available");
  if (count == 1) return {0};
  std::vector<int> idx(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    idx[static_cast<std::size_t>(t)] =
        static_cast<int>(std::lround(static_cast<double>(t) * (available - 1) / (count - 1)));
  }
  return idx;
}

std::vector<double> area_resize(const float* src, int width, int height, int out_width,
                                int out_height) {
  const auto tx = area_taps(width, out_width);
  const auto ty = area_taps(height, out_height);
  std::vector<double> tmp(static_cast<std::size_t>(height) * out_width, 0.0);
  for (int y = 0; y < height; ++y) {
    const float* row = src + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : tx[static_cast<std::size_t>(x)]) acc += t.w * row[t.src];
      tmp[static_cast<std::size_t>(y) * out_width + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_height) * out_width, 0.0);
  for (int y = 0; y < out_height; ++y) {
    for (const Tap& t : ty[static_cast<std::size_t>(y)]) {
      for (int x = 0; x < out_width; ++x) {
        out[static_cast<std::size_t>(y) * out_width + x] +=
            t.w * tmp[static_cast<std::size_t>(t.src) * out_width + x];
      }
    }
  }
  return out;
}

ModelInput preprocess_video(const FrameSequence& seq, const ModelConfig& cfg, ModelInput input) {
  validate(seq);
  require(seq.width == 2 * seq.height, "video is not 2:1 ERP (" + std::to_string(seq.width) +
                                           "x" + std::to_string(seq.height) + ")");
  const int t_count = cfg.frames_per_clip;
  const auto idx = sample_frame_indices(static_cast<int>(seq.num_frames()), t_count);
  const LatitudeBandPartition part = partition_erp(seq.height, cfg.bands);
  input.band_prior = cos_latitude_prior(part);
  input.band_inputs.clear();
  const int bh = cfg.band_input_height;
  const int bw = cfg.band_input_width;
  for (const BandRange& band : part.bands) {
    Tensor t({t_count, 1, bh, bw});
    for (int i = 0; i < t_count; ++i) {
      const auto& frame = seq.frames[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      const float* region = frame.data() + static_cast<std::size_t>(band.row_start) * seq.width;
      const auto plane = area_resize(region, seq.width, band.rows(), bw, bh);
      double* dst = t.data() + static_cast<std::size_t>(i) * bh * bw;
      for (std::size_t p = 0; p < plane.size(); ++p) dst[p] = plane[p] / 255.0;
    }
    input.band_inputs.push_back(std::move(t));
  }
  return input;
}

ModelInput preprocess(const FrameSequence& frames, const AudioClip& audio,
                      const ModelConfig& cfg) {
  ModelInput in = preprocess_video(frames, cfg);
  const PatchList patches = audio_patches(audio, cfg.audio);
  require(!patches.patches.empty(), "audio is shorter than one analysis window");
  const int p = static_cast<int>(patches.patches.size());
  const int pf = cfg.audio.patch_frames;
  const int nm = cfg.audio.num_mel;
  in.audio_patches = Tensor({p, 1, pf, nm});
  for (int i = 0; i < p; ++i) {
    const Tensor& src = patches.patches[static_cast<std::size_t>(i)];
    std::copy(src.values().begin(), src.values().end(),
              in.audio_patches.data() + static_cast<std::size_t>(i) * pf * nm);
  }
  return in;
}

// ---------------------------------------------------------------------------
// Construction

AvqaModel::AvqaModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  const int d = cfg_.d_model;
  for (int m = 0; m < cfg_.bands; ++m) {
    Cnn cnn;
    const std::string prefix = "video.band" + std::to_string(m);
    int in = 1;
    for (std::size_t i = 0; i < cfg_.band_channels.size(); ++i) {
      cnn.convs.emplace_back(prefix + ".conv" + std::to_string(i), in, cfg_.band_channels[i], 3,
                             1, 1);
      cnn.pool_after.push_back(true);
      in = cfg_.band_channels[i];
    }
    cnn.proj = nn::Linear(prefix + ".proj", in, d);
    band_encoders_.push_back(std::move(cnn));
  }
  int in = 1;
  for (std::size_t i = 0; i < cfg_.audio_channels.size(); ++i) {
    audio_encoder_.convs.emplace_back("audio.conv" + std::to_string(i), in,
                                      cfg_.audio_channels[i], 3, 1, 1);
    audio_encoder_.pool_after.push_back(true);
    in = cfg_.audio_channels[i];
  }
  audio_encoder_.proj = nn::Linear("audio.proj", in, d);
  audio_norm_ = nn::LayerNorm("audio.norm", d);

  auto make_block = [&](const std::string& prefix, bool cross) {
    Block b;
    b.ln_sa = nn::LayerNorm(prefix + ".norm_sa", d);
    b.self_attn = nn::MultiHeadAttention(prefix + ".self_attn", d, cfg_.heads);
    b.cross = cross;
    if (cross) {
      b.ln_ca = nn::LayerNorm(prefix + ".norm_ca", d);
      b.cross_attn = nn::MultiHeadAttention(prefix + ".cross_attn", d, cfg_.heads);
    }
    b.ln_ff = nn::LayerNorm(prefix + ".norm_ff", d);
    b.ffn = nn::FeedForward(prefix + ".ffn", d, d * cfg_.ffn_mult);
    return b;
  };
  temporal_ = make_block("video.temporal", false);
  for (int b = 0; b < cfg_.fusion_blocks; ++b) {
    fusion_.push_back(make_block("fusion.block" + std::to_string(b), b % 2 == 1));
  }
  final_norm_ = nn::LayerNorm("fusion.norm", d);
  head_ = nn::Linear("head", d, 1);
  head_hidden_ = nn::Linear("head.hidden", cfg_.fusion_mode == FusionMode::kCat ? 2 * d : d, d);
  head_out_ = nn::Linear("head.out", d, 1);
}

void AvqaModel::declare_cnn(const Cnn& cnn, nn::ParamStore& ps, nn::Rng& rng) const {
  for (const auto& c : cnn.convs) c.declare(ps, rng);
  cnn.proj.declare(ps, rng);
}

void AvqaModel::declare_block(const Block& b, nn::ParamStore& ps, nn::Rng& rng) const {
  b.ln_sa.declare(ps);
  b.self_attn.declare(ps, rng);
  if (b.cross) {
    b.ln_ca.declare(ps);
    b.cross_attn.declare(ps, rng);
  }
  b.ln_ff.declare(ps);
  b.ffn.declare(ps, rng);
}

nn::ParamStore AvqaModel::init_params() const {
  nn::ParamStore ps;
  nn::Rng rng(cfg_.seed);
  for (const auto& enc : band_encoders_) declare_cnn(enc, ps, rng);
  ps.add(kLatitudeLogits, {cfg_.bands});
  declare_cnn(audio_encoder_, ps, rng);
  audio_norm_.declare(ps);
  declare_block(temporal_, ps, rng);
  if (cfg_.fusion_mode == FusionMode::kTransformer) {
    for (const auto& b : fusion_) declare_block(b, ps, rng);
    final_norm_.declare(ps);
    head_.declare(ps, rng);
  } else {
    head_hidden_.declare(ps, rng);
    head_out_.declare(ps, rng);
  }
  // Band-encoder convs at twice the Kaiming bound; output layer at zero.
  for (auto& [name, value] : ps.values()) {
    if (value.rank() == 4 && name.rfind("video.", 0) == 0) value *= kBandConvInitScale;
  }
  const char* out_layer = cfg_.fusion_mode == FusionMode::kTransformer ? "head.weight"
                                                                       : "head.out.weight";
  ps.value(out_layer).fill(0.0);
  ps.zero_grad();
  return ps;
}

// ---------------------------------------------------------------------------
// Building blocks

Tensor AvqaModel::cnn_forward(const Cnn& cnn, const nn::ParamStore& ps, const Tensor& x,
                              CnnCache* cache) const {
  if (cache) cache->stages.assign(cnn.convs.size(), {});
  Tensor h = x;
  for (std::size_t i = 0; i < cnn.convs.size(); ++i) {
    CnnStageCache* st = cache ? &cache->stages[i] : nullptr;
    Tensor c = cnn.convs[i].forward(ps, h, st ? &st->conv : nullptr);
    Tensor r = nn::relu(c);
    if (st) {
      st->pre_relu = std::move(c);
      st->pooled = cnn.pool_after[i];
    }
    h = cnn.pool_after[i] ? nn::maxpool2(r, st ? &st->pool : nullptr) : std::move(r);
  }
  Tensor g = nn::global_avg_pool(h);
  Tensor out = cnn.proj.forward(ps, g);
  if (cache) {
    cache->gap_input_shape = h.shape();
    cache->gap_out = std::move(g);
  }
  return out;
}

void AvqaModel::cnn_backward(const Cnn& cnn, nn::ParamStore& ps, const Tensor& d_out,
                             const CnnCache& cache) const {
  Tensor dg = cnn.proj.backward(ps, d_out, cache.gap_out);
  Tensor dh = nn::global_avg_pool_backward(dg, cache.gap_input_shape);
  for (std::size_t i = cnn.convs.size(); i-- > 0;) {
    const CnnStageCache& st = cache.stages[i];
    Tensor dr = st.pooled ? nn::maxpool2_backward(dh, st.pool) : std::move(dh);
    Tensor dc = nn::relu_backward(dr, st.pre_relu);
    dh = cnn.convs[i].backward(ps, dc, st.conv);
  }
}

Tensor AvqaModel::block_forward(const Block& b, const nn::ParamStore& ps, const Tensor& x,
                                const Tensor* memory, BlockCache* c) const {
  Tensor n1 = b.ln_sa.forward(ps, x, c ? &c->ln_sa : nullptr);
  Tensor x1 = x + b.self_attn.forward(ps, n1, n1, c ? &c->sa : nullptr);
  Tensor x2;
  if (b.cross) {
    require(memory != nullptr, "cross-attention block without memory tokens");
    Tensor n2 = b.ln_ca.forward(ps, x1, c ? &c->ln_ca : nullptr);
    x2 = x1 + b.cross_attn.forward(ps, n2, *memory, c ? &c->ca : nullptr);
  } else {
    x2 = x1;
  }
  Tensor n3 = b.ln_ff.forward(ps, x2, c ? &c->ln_ff : nullptr);
  Tensor y = x2 + b.ffn.forward(ps, n3, c ? &c->ff : nullptr);
  nn::check_finite(y, "transformer block");
  return y;
}

Tensor AvqaModel::block_backward(const Block& b, nn::ParamStore& ps, const Tensor& dy,
                                 const BlockCache& c, Tensor* d_memory) const {
  Tensor d_x2 = dy;
  d_x2 += b.ln_ff.backward(ps, b.ffn.backward(ps, dy, c.ff), c.ln_ff);
  Tensor d_x1 = d_x2;
  if (b.cross) {
    nn::AttentionGrad g = b.cross_attn.backward(ps, d_x2, c.ca);
    d_x1 += b.ln_ca.backward(ps, g.d_q_in, c.ln_ca);
    if (d_memory) *d_memory += g.d_kv_in;
  }
  nn::AttentionGrad g = b.self_attn.backward(ps, d_x1, c.sa);
  Tensor d_n1 = g.d_q_in + g.d_kv_in;
  Tensor dx = d_x1;
  dx += b.ln_sa.backward(ps, d_n1, c.ln_sa);
  return dx;
}

// ---------------------------------------------------------------------------
// Branches

Tensor AvqaModel::video_branch(const nn::ParamStore& ps, const ModelInput& in,
                               VideoCache* cache) const {
  require(static_cast<int>(in.band_inputs.size()) == cfg_.bands,
          "expected " + std::to_string(cfg_.bands) + " band inputs, got " +
              std::to_string(in.band_inputs.size()));
  std::vector<Tensor> features;
  if (cache) cache->band_cnn.assign(static_cast<std::size_t>(cfg_.bands), {});
  for (int m = 0; m < cfg_.bands; ++m) {
    features.push_back(cnn_forward(band_encoders_[static_cast<std::size_t>(m)], ps,
                                   in.band_inputs[static_cast<std::size_t>(m)],
                                   cache ? &cache->band_cnn[static_cast<std::size_t>(m)] : nullptr));
  }
  const Tensor& logits = ps.value(kLatitudeLogits);
  LatitudeWeights w = make_latitude_weights(in.band_prior, logits.vec());
  Tensor agg = aggregate_band_features(features, w.effective_weights);
  if (cfg_.video_positional_encoding) agg += nn::sinusoidal_positions(agg.dim(0), cfg_.d_model);
  Tensor tokens = block_forward(temporal_, ps, agg, nullptr, cache ? &cache->temporal : nullptr);
  if (cache) {
    cache->band_features = std::move(features);
    cache->weights = std::move(w);
  }
  return tokens;
}

void AvqaModel::video_branch_backward(nn::ParamStore& ps, const Tensor& d_tokens,
                                      const VideoCache& cache) const {
  Tensor d_agg = block_backward(temporal_, ps, d_tokens, cache.temporal, nullptr);
  AggregateGrad g = aggregate_band_features_backward(d_agg, cache.band_features, cache.weights);
  Tensor& dl = ps.grad(kLatitudeLogits);
  for (int m = 0; m < cfg_.bands; ++m) {
    dl[static_cast<std::size_t>(m)] += g.d_logits[static_cast<std::size_t>(m)];
    cnn_backward(band_encoders_[static_cast<std::size_t>(m)], ps,
                 g.d_features[static_cast<std::size_t>(m)],
                 cache.band_cnn[static_cast<std::size_t>(m)]);
  }
}

Tensor AvqaModel::audio_branch(const nn::ParamStore& ps, const Tensor& patches,
                               AudioCache* cache) const {
  require(patches.rank() == 4 && patches.dim(0) >= 1 && patches.dim(1) == 1 &&
              patches.dim(2) == cfg_.audio.patch_frames && patches.dim(3) == cfg_.audio.num_mel,
          "audio patches must be [P>=1,1," + std::to_string(cfg_.audio.patch_frames) + "," +
              std::to_string(cfg_.audio.num_mel) + "], got " + nn::to_string(patches.shape()));
  Tensor features = cnn_forward(audio_encoder_, ps, patches, cache ? &cache->cnn : nullptr);
  Tensor tokens = audio_norm_.forward(ps, features, cache ? &cache->norm : nullptr);
  if (cfg_.audio_positional_encoding) {
    tokens += nn::sinusoidal_positions(tokens.dim(0), cfg_.d_model);
  }
  return tokens;
}

void AvqaModel::audio_branch_backward(nn::ParamStore& ps, const Tensor& d_tokens,
                                      const AudioCache& cache) const {
  cnn_backward(audio_encoder_, ps, audio_norm_.backward(ps, d_tokens, cache.norm), cache.cnn);
}

// ---------------------------------------------------------------------------
// Fusion and head

double AvqaModel::fusion_forward(const nn::ParamStore& ps, const Tensor& v, const Tensor& a,
                                 ForwardCache* cache) const {
  require(v.rank() == 2 && a.rank() == 2 && v.dim(1) == cfg_.d_model &&
              a.dim(1) == cfg_.d_model && v.dim(0) >= 1 && a.dim(0) >= 1,
          "fusion expects [T,d] video and [P,d] audio tokens");
  double logit = 0.0;
  if (cfg_.fusion_mode == FusionMode::kTransformer) {
    if (cache) cache->blocks.assign(fusion_.size(), {});
    Tensor x = v;
    for (std::size_t b = 0; b < fusion_.size(); ++b) {
      x = block_forward(fusion_[b], ps, x, &a, cache ? &cache->blocks[b] : nullptr);
    }
    Tensor n = final_norm_.forward(ps, x, cache ? &cache->final_norm : nullptr);
    Tensor pooled = nn::mean_rows(n);
    logit = head_.forward(ps, pooled)[0];
    if (cache) {
      cache->fused = std::move(x);
      cache->pooled = std::move(pooled);
    }
  } else {
    const Tensor pv = nn::mean_rows(v);
    const Tensor pa = nn::mean_rows(a);
    Tensor z;
    if (cfg_.fusion_mode == FusionMode::kCat) {
      z = Tensor({1, 2 * cfg_.d_model});
      std::copy(pv.values().begin(), pv.values().end(), z.data());
      std::copy(pa.values().begin(), pa.values().end(), z.data() + cfg_.d_model);
    } else {
      z = pv + pa;
    }
    Tensor pre = head_hidden_.forward(ps, z);
    logit = head_out_.forward(ps, nn::relu(pre))[0];
    if (cache) {
      cache->head_in = std::move(z);
      cache->head_hidden_pre = std::move(pre);
    }
  }
  if (!std::isfinite(logit)) throw NumericError("non-finite model output");
  const double score = nn::sigmoid(logit);
  if (cache) {
    cache->logit = logit;
    cache->score = score;
  }
  return score;
}

double AvqaModel::forward(const nn::ParamStore& ps, const ModelInput& in,
                          ForwardCache* cache) const {
  Tensor v = video_branch(ps, in, cache ? &cache->video : nullptr);
  Tensor a = audio_branch(ps, in.audio_patches, cache ? &cache->audio : nullptr);
  const double s = fusion_forward(ps, v, a, cache);
  if (cache) {
    cache->video_tokens = std::move(v);
    cache->audio_tokens = std::move(a);
  }
  return s;
}

void AvqaModel::backward(nn::ParamStore& ps, double d_score, const ForwardCache& c) const {
  const double d_logit = d_score * c.score * (1.0 - c.score);
  const Tensor d_head_out = scalar_tensor(d_logit);
  const int t = c.video_tokens.dim(0);
  const int p = c.audio_tokens.dim(0);
  Tensor d_video;
  Tensor d_audio(c.audio_tokens.shape());
  if (cfg_.fusion_mode == FusionMode::kTransformer) {
    Tensor d_pooled = head_.backward(ps, d_head_out, c.pooled);
    Tensor d_x = final_norm_.backward(ps, nn::mean_rows_backward(d_pooled, t), c.final_norm);
    for (std::size_t b = fusion_.size(); b-- > 0;) {
      d_x = block_backward(fusion_[b], ps, d_x, c.blocks[b], &d_audio);
    }
    d_video = std::move(d_x);
  } else {
    Tensor d_hidden = head_out_.backward(ps, d_head_out, nn::relu(c.head_hidden_pre));
    Tensor d_z = head_hidden_.backward(ps, nn::relu_backward(d_hidden, c.head_hidden_pre),
                                       c.head_in);
    const int d = cfg_.d_model;
    Tensor d_pv({1, d}), d_pa({1, d});
    for (int j = 0; j < d; ++j) {
      if (cfg_.fusion_mode == FusionMode::kCat) {
        d_pv[static_cast<std::size_t>(j)] = d_z[static_cast<std::size_t>(j)];
        d_pa[static_cast<std::size_t>(j)] = d_z[static_cast<std::size_t>(d + j)];
      } else {
        d_pv[static_cast<std::size_t>(j)] = d_z[static_cast<std::size_t>(j)];
        d_pa[static_cast<std::size_t>(j)] = d_z[static_cast<std::size_t>(j)];
      }
    }
    d_video = nn::mean_rows_backward(d_pv, t);
    d_audio = nn::mean_rows_backward(d_pa, p);
  }
  video_branch_backward(ps, d_video, c.video);
  audio_branch_backward(ps, d_audio, c.audio);
}

// ---------------------------------------------------------------------------
// Training and inference

double evaluate_loss(const AvqaModel& model, const nn::ParamStore& ps,
                     const std::vector<TrainingSample>& samples) {
  require(!samples.empty(), "no samples to evaluate");
  double loss = 0.0;
  for (const auto& s : samples) {
    const double e = model.forward(ps, s.input) - s.target;
    loss += e * e;
  }
  return loss / static_cast<double>(samples.size());
}

TrainResult train(const AvqaModel& model, const std::vector<TrainingSample>& samples,
                  const StepCallback& on_step) {
  require(!samples.empty(), "empty training split");
  const ModelConfig& cfg = model.config();
  TrainResult result;
  result.params = model.init_params();
  nn::AdamState adam;
  adam.lr = cfg.lr;
  nn::Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t n = samples.size();
  const std::size_t batch =
      cfg.batch_size == 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  std::vector<std::size_t> order(n);
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      result.params.zero_grad();
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const TrainingSample& s = samples[order[i]];
        ForwardCache cache;
        const double score = model.forward(result.params, s.input, &cache);
        const double e = score - s.target;
        loss += e * e;
        model.backward(result.params, 2.0 * e * inv, cache);
      }
      loss *= inv;
      nn::adam_step(result.params, adam);
      result.step_losses.push_back(loss);
      if (on_step) on_step(step, loss);
      ++step;
    }
  }
  return result;
}

double predict_score(const AvqaModel& model, const nn::ParamStore& ps, const ModelInput& in) {
  return 100.0 * model.forward(ps, in);
}

// ---------------------------------------------------------------------------
// Checkpoints

nn::TensorMap make_checkpoint(const ModelConfig& cfg, const nn::ParamStore& ps) {
  nn::TensorMap out = ps.values();
  out["meta.bands"] = scalar_tensor(cfg.bands);
  out["meta.band_channels"] = int_tensor(cfg.band_channels);
  out["meta.band_input"] = int_tensor({cfg.band_input_height, cfg.band_input_width});
  out["meta.d_model"] = scalar_tensor(cfg.d_model);
  out["meta.fusion_blocks"] = scalar_tensor(cfg.fusion_blocks);
  out["meta.heads"] = scalar_tensor(cfg.heads);
  out["meta.ffn_mult"] = scalar_tensor(cfg.ffn_mult);
  out["meta.audio_channels"] = int_tensor(cfg.audio_channels);
  out["meta.frames_per_clip"] = scalar_tensor(cfg.frames_per_clip);
  out["meta.fusion_mode"] = scalar_tensor(static_cast<int>(cfg.fusion_mode));
  out["meta.positional_encoding"] =
      int_tensor({cfg.video_positional_encoding ? 1 : 0, cfg.audio_positional_encoding ? 1 : 0});
  const auto cross = cross_attention_blocks(cfg);
  out["meta.cross_attention_blocks"] = cross.empty() ? Tensor({0}) : int_tensor(cross);
  const AudioFrontendConfig& a = cfg.audio;
  out["meta.audio_frontend"] =
      Tensor({9}, {static_cast<double>(a.sample_rate), a.frame_len_s, a.hop_s,
                   static_cast<double>(a.num_mel), a.fmin_hz, a.fmax_hz, a.log_offset,
                   static_cast<double>(a.patch_frames), static_cast<double>(a.patch_hop)});
  std::vector<double> seed_words;
  for (int i = 0; i < 4; ++i) seed_words.push_back(static_cast<double>((cfg.seed >> (16 * i)) & 0xffff));
  out["meta.seed"] = Tensor({4}, seed_words);
  out["meta.train"] = Tensor({3}, {cfg.lr, static_cast<double>(cfg.epochs),
                                   static_cast<double>(cfg.batch_size)});
  return out;
}

ModelConfig config_from_checkpoint(const nn::TensorMap& ckpt) {
  auto get = [&](const std::string& name) -> const Tensor& {
    auto it = ckpt.find(name);
    if (it == ckpt.end()) throw DataError("checkpoint lacks '" + name + "'");
    return it->second;
  };
  auto as_int = [&](const std::string& name) { return static_cast<int>(std::lround(get(name)[0])); };
  auto as_ints = [&](const std::string& name) {
    std::vector<int> v;
    for (double x : get(name).values()) v.push_back(static_cast<int>(std::lround(x)));
    return v;
  };
  ModelConfig c;
  c.bands = as_int("meta.bands");
  c.band_channels = as_ints("meta.band_channels");
  const auto bi = as_ints("meta.band_input");
  if (bi.size() != 2) throw DataError("checkpoint: meta.band_input must have 2 entries");
  c.band_input_height = bi[0];
  c.band_input_width = bi[1];
  c.d_model = as_int("meta.d_model");
  c.fusion_blocks = as_int("meta.fusion_blocks");
  c.heads = as_int("meta.heads");
  c.ffn_mult = as_int("meta.ffn_mult");
  c.audio_channels = as_ints("meta.audio_channels");
  c.frames_per_clip = as_int("meta.frames_per_clip");
  const int mode = as_int("meta.fusion_mode");
  if (mode < 0 || mode > 2) throw DataError("checkpoint: bad fusion mode");
  c.fusion_mode = static_cast<FusionMode>(mode);
  const auto pe = as_ints("meta.positional_encoding");
  if (pe.size() != 2) throw DataError("checkpoint: meta.positional_encoding must have 2 entries");
  c.video_positional_encoding = pe[0] != 0;
  c.audio_positional_encoding = pe[1] != 0;
  const Tensor& a = get("meta.audio_frontend");
  if (a.size() != 9) throw DataError("checkpoint: meta.audio_frontend must have 9 entries");
  c.audio.sample_rate = static_cast<int>(std::lround(a[0]));
  c.audio.frame_len_s = a[1];
  c.audio.hop_s = a[2];
  c.audio.num_mel = static_cast<int>(std::lround(a[3]));
  c.audio.fmin_hz = a[4];
  c.audio.fmax_hz = a[5];
  c.audio.log_offset = a[6];
  c.audio.patch_frames = static_cast<int>(std::lround(a[7]));
  c.audio.patch_hop = static_cast<int>(std::lround(a[8]));
  const auto seed = as_ints("meta.seed");
  if (seed.size() != 4) throw DataError("checkpoint: meta.seed must have 4 entries");
  c.seed = 0;
  for (int i = 0; i < 4; ++i) c.seed |= static_cast<std::uint64_t>(seed[static_cast<std::size_t>(i)]) << (16 * i);
  const Tensor& tr = get("meta.train");
  if (tr.size() != 3) throw DataError("checkpoint: meta.train must have 3 entries");
  c.lr = tr[0];
  c.epochs = static_cast<int>(std::lround(tr[1]));
  c.batch_size = static_cast<int>(std::lround(tr[2]));
  try {
    validate(c);
  } catch (const ValidationError& ex) {
    throw DataError(std::string("checkpoint describes an invalid model: ") + ex.what());
  }
  const auto cross = as_ints("meta.cross_attention_blocks");
  if (cross != cross_attention_blocks(c)) {
    throw DataError("checkpoint: cross-attention block layout does not match this build");
  }
  return c;
}

nn::ParamStore params_from_checkpoint(const AvqaModel& model, const nn::TensorMap& ckpt) {
  nn::ParamStore ps = model.init_params();
  for (auto& [name, value] : ps.values()) {
    auto it = ckpt.find(name);
    if (it == ckpt.end()) throw DataError("checkpoint lacks parameter '" + name + "'");
    if (it->second.shape() != value.shape()) {
      throw DataError("checkpoint parameter '" + name + "' has shape " +
                      nn::to_string(it->second.shape()) + ", expected " +
                      nn::to_string(value.shape()));
    }
    value = it->second;
  }
  for (const auto& [name, _] : ckpt) {
    if (name.rfind("meta.", 0) != 0 && !ps.contains(name)) {
      throw DataError("checkpoint has unexpected tensor '" + name + "'");
    }
  }
  return ps;
}

void check_architecture_match(const ModelConfig& e, const ModelConfig& a) {
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max(1.0, std::abs(x)); };
  auto mismatch = [](const std::string& field) {
    throw ValidationError("checkpoint/config mismatch in " + field);
  };
  if (e.bands != a.bands) mismatch("bands");
  if (e.band_channels != a.band_channels) mismatch("band_channels");
  if (e.band_input_height != a.band_input_height || e.band_input_width != a.band_input_width)
    mismatch("band input size");
  if (e.d_model != a.d_model) mismatch("d_model");
  if (e.fusion_blocks != a.fusion_blocks) mismatch("fusion_blocks");
  if (e.heads != a.heads) mismatch("heads");
  if (e.ffn_mult != a.ffn_mult) mismatch("ffn_mult");
  if (e.audio_channels != a.audio_channels) mismatch("audio_channels");
  if (e.frames_per_clip != a.frames_per_clip) mismatch("frames_per_clip");
  if (e.fusion_mode != a.fusion_mode) mismatch("fusion_mode");
  if (e.video_positional_encoding != a.video_positional_encoding ||
      e.audio_positional_encoding != a.audio_positional_encoding)
    mismatch("positional encoding flags");
  const auto& x = e.audio;
  const auto& y = a.audio;
  if (x.sample_rate != y.sample_rate || !close(x.frame_len_s, y.frame_len_s) ||
      !close(x.hop_s, y.hop_s) || x.num_mel != y.num_mel || !close(x.fmin_hz, y.fmin_hz) ||
      !close(x.fmax_hz, y.fmax_hz) || !close(x.log_offset, y.log_offset) ||
      x.patch_frames != y.patch_frames || x.patch_hop != y.patch_hop)
    mismatch("audio front-end");
}

LoadedModel load_model(const nn::TensorMap& ckpt) {
  AvqaModel model(config_from_checkpoint(ckpt));
  nn::ParamStore ps = params_from_checkpoint(model, ckpt);
  return {std::move(model), std::move(ps)};
}

}  // namespace avqa
