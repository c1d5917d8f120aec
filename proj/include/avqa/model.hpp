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

// No-reference audio-visual quality model for ERP video.
//
//   video: frames -> M latitude bands -> per-band CNN encoders ->
//          latitude-weighted aggregation -> temporal self-attention block
//   audio: log-mel patches -> 4-stage CNN -> layer norm -> one token per patch
//   fusion: N pre-norm transformer blocks over the video tokens; blocks
//           1, 3, 5, ... (0-based) add cross-attention to the audio tokens
//   head: mean-pool -> linear -> sigmoid, trained against MOS / 100

#ifndef AVQA_MODEL_HPP_
#define AVQA_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "avqa/audiofe.hpp"
#include "avqa/erp.hpp"
#include "avqa/manifest.hpp"
#include "avqa/nn/checkpoint.hpp"
#include "avqa/nn/ops.hpp"

namespace avqa {

enum class FusionMode { kTransformer = 0, kCat = 1, kAdd = 2 };

std::string_view to_string(FusionMode m);
FusionMode fusion_mode_from_string(std::string_view s);

struct ModelConfig {
  int bands = 4;
  std::vector<int> band_channels{8, 16, 32};
  int band_input_height = 16;
  int band_input_width = 32;
  int d_model = 64;
  int fusion_blocks = 4;
  int heads = 4;
  int ffn_mult = 2;
  std::vector<int> audio_channels{8, 16, 32, 64};
  int frames_per_clip = 8;
  FusionMode fusion_mode = FusionMode::kTransformer;
  bool video_positional_encoding = true;
  bool audio_positional_encoding = false;
  AudioFrontendConfig audio;

  std::uint64_t seed = 1;
  double lr = 1e-3;
  int epochs = 300;
  int batch_size = 0;  // 0: full batch

  bool operator==(const ModelConfig&) const = default;
};

// Throws ValidationError for any ill-formed field.
void validate(const ModelConfig& cfg);

// Indices of the fusion blocks that carry cross-attention.
std::vector<int> cross_attention_blocks(const ModelConfig& cfg);

// Preprocessed inputs for one sequence.
struct ModelInput {
  std::vector<nn::Tensor> band_inputs;  // M tensors [T,1,bh,bw], luma in [0,1]
  std::vector<double> band_prior;       // cos-latitude prior for the source height
  nn::Tensor audio_patches;             // [P,1,patch_frames,num_mel]
};

// Evenly spaced indices including the first and last frame.
std::vector<int> sample_frame_indices(int available, int count);

// Exact area-overlap resampling of a w x h plane to out_w x out_h.
std::vector<double> area_resize(const float* src, int width, int height, int out_width,
                                int out_height);

ModelInput preprocess_video(const FrameSequence& frames, const ModelConfig& cfg,
                            ModelInput input = {});
ModelInput preprocess(const FrameSequence& frames, const AudioClip& audio,
                      const ModelConfig& cfg);

struct CnnStageCache {
  nn::Conv2dCache conv;
  nn::Tensor pre_relu;
  nn::MaxPoolCache pool;
  bool pooled = false;
};

struct CnnCache {
  std::vector<CnnStageCache> stages;
  nn::Shape gap_input_shape;
  nn::Tensor gap_out;
};

struct BlockCache {
  nn::Tensor x_in;
  nn::LayerNormCache ln_sa;
  nn::AttentionCache sa;
  nn::Tensor x_after_sa;
  nn::LayerNormCache ln_ca;
  nn::AttentionCache ca;
  nn::Tensor x_after_ca;
  nn::LayerNormCache ln_ff;
  nn::FeedForwardCache ff;
};

struct VideoCache {
  std::vector<CnnCache> band_cnn;
  std::vector<nn::Tensor> band_features;  // [T,d] per band
  LatitudeWeights weights;
  BlockCache temporal;
};

struct AudioCache {
  CnnCache cnn;
  nn::LayerNormCache norm;
};

struct ForwardCache {
  VideoCache video;
  AudioCache audio;
  nn::Tensor video_tokens;
  nn::Tensor audio_tokens;
  std::vector<BlockCache> blocks;
  nn::Tensor fused;  // output of the last block
  nn::LayerNormCache final_norm;
  nn::Tensor pooled;
  nn::Tensor head_in;
  nn::Tensor head_hidden_pre;
  double logit = 0.0;
  double score = 0.0;
};

class AvqaModel {
 public:
  explicit AvqaModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }

  // Declares and initializes every parameter from cfg.seed: Kaiming-uniform
  // weights except band-encoder convs (twice the Kaiming bound) and the
  // output layer (zero), zero biases and unit layer-norm gains.
  nn::ParamStore init_params() const;

  // f_v: [T, d_model]
  nn::Tensor video_branch(const nn::ParamStore& ps, const ModelInput& in,
                          VideoCache* cache = nullptr) const;
  // f_a: [P, d_model]
  nn::Tensor audio_branch(const nn::ParamStore& ps, const nn::Tensor& patches,
                          AudioCache* cache = nullptr) const;
  // Fusion plus head; returns the sigmoid output in (0,1).
  double fusion_forward(const nn::ParamStore& ps, const nn::Tensor& video_tokens,
                        const nn::Tensor& audio_tokens, ForwardCache* cache = nullptr) const;

  double forward(const nn::ParamStore& ps, const ModelInput& in,
                 ForwardCache* cache = nullptr) const;

  // Accumulates d(loss)/d(params) given d(loss)/d(score).
  void backward(nn::ParamStore& ps, double d_score, const ForwardCache& cache) const;

  // Pieces of backward, exposed for branch-level gradient checks.
  void video_branch_backward(nn::ParamStore& ps, const nn::Tensor& d_tokens,
                             const VideoCache& cache) const;
  void audio_branch_backward(nn::ParamStore& ps, const nn::Tensor& d_tokens,
                             const AudioCache& cache) const;

 private:
  struct Cnn {
    std::vector<nn::Conv2d> convs;
    std::vector<bool> pool_after;
    nn::Linear proj;
  };
  struct Block {
    nn::LayerNorm ln_sa, ln_ca, ln_ff;
    nn::MultiHeadAttention self_attn, cross_attn;
    nn::FeedForward ffn;
    bool cross = false;
  };

  nn::Tensor cnn_forward(const Cnn& cnn, const nn::ParamStore& ps, const nn::Tensor& x,
                         CnnCache* cache) const;
  void cnn_backward(const Cnn& cnn, nn::ParamStore& ps, const nn::Tensor& d_out,
                    const CnnCache& cache) const;
  nn::Tensor block_forward(const Block& b, const nn::ParamStore& ps, const nn::Tensor& x,
                           const nn::Tensor* memory, BlockCache* cache) const;
  // Returns dx; adds the memory gradient to *d_memory when cross-attention ran.
  nn::Tensor block_backward(const Block& b, nn::ParamStore& ps, const nn::Tensor& dy,
                            const BlockCache& cache, nn::Tensor* d_memory) const;
  void declare_cnn(const Cnn& cnn, nn::ParamStore& ps, nn::Rng& rng) const;
  void declare_block(const Block& b, nn::ParamStore& ps, nn::Rng& rng) const;

  ModelConfig cfg_;
  std::vector<Cnn> band_encoders_;
  Cnn audio_encoder_;
  nn::LayerNorm audio_norm_;
  Block temporal_;
  std::vector<Block> fusion_;
  nn::LayerNorm final_norm_;
  nn::Linear head_;         // transformer mode
  nn::Linear head_hidden_;  // cat/add modes
  nn::Linear head_out_;
};

inline constexpr const char* kLatitudeLogits = "video.latitude_logits";

// ---- training / inference ---------------------------------------------------

struct TrainingSample {
  std::string sequence_id;
  ModelInput input;
  double target = 0.0;  // MOS / 100
};

struct TrainResult {
  nn::ParamStore params;
  std::vector<double> step_losses;  // mean squared error before each update
};

using StepCallback = std::function<void(int step, double loss)>;

// Full-batch (batch_size 0) or mini-batch Adam on MSE. Sample order per
// epoch comes from a PRNG seeded with cfg.seed; gradients are accumulated
// in that fixed order.
TrainResult train(const AvqaModel& model, const std::vector<TrainingSample>& samples,
                  const StepCallback& on_step = {});

// Mean squared error of the current parameters over `samples`.
double evaluate_loss(const AvqaModel& model, const nn::ParamStore& ps,
                     const std::vector<TrainingSample>& samples);

// Parameters plus "meta.*" tensors describing the architecture.
nn::TensorMap make_checkpoint(const ModelConfig& cfg, const nn::ParamStore& ps);
ModelConfig config_from_checkpoint(const nn::TensorMap& ckpt);
nn::ParamStore params_from_checkpoint(const AvqaModel& model, const nn::TensorMap& ckpt);

// Throws ValidationError describing the first architectural difference.
void check_architecture_match(const ModelConfig& expected, const ModelConfig& actual);

struct LoadedModel {
  AvqaModel model;
  nn::ParamStore params;
};
LoadedModel load_model(const nn::TensorMap& ckpt);

// 100 * sigmoid output.
double predict_score(const AvqaModel& model, const nn::ParamStore& ps, const ModelInput& in);

}  // namespace avqa

#endif  // AVQA_MODEL_HPP_
