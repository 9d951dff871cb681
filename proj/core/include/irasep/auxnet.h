// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_AUXNET_H_
#define IRASEP_AUXNET_H_

#include <torch/torch.h>

#include "irasep/layers.h"

namespace irasep {

struct AuxConfig {
  int64_t resnet_blocks = 3;
  int64_t block_channels = 128;
  int64_t kernel_size = 3;
  int64_t embedding_dim = 128;  // D
  int64_t num_speakers = 0;     // classification head size; 0 = no head

  void Validate() const;
  bool operator==(const AuxConfig&) const = default;
};

// conv -> gLN -> PReLU -> conv -> gLN -> (+ skip) -> PReLU. Convolutions run
// along time with replicate padding, so a time-constant input stays
// time-constant.
class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int64_t channels, int64_t kernel_size);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr};
  GlobalLayerNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::PReLU act1_{nullptr}, act2_{nullptr};
};
TORCH_MODULE(ResBlock);

// Speaker auxiliary network. Embed() maps latent frames [B, N, K] to
// embeddings [B, D]: gLN -> 1x1 projection -> ResNet blocks -> mean over
// time -> linear to D. The same instance embeds the reference (v_0) and the
// extracted latents fed back during refinement.
class AuxNetImpl : public torch::nn::Module {
 public:
  AuxNetImpl(int64_t in_channels, const AuxConfig& config);

  torch::Tensor Embed(const torch::Tensor& frames);

  // Log-probabilities over num_speakers classes, [B, num_speakers].
  torch::Tensor Classify(const torch::Tensor& embedding);
  torch::Tensor Logits(const torch::Tensor& embedding);

  bool has_classifier() const { return !classifier_.is_empty(); }
  const AuxConfig& config() const { return config_; }
  torch::nn::Linear classifier() const { return classifier_; }

 private:
  AuxConfig config_;
  int64_t in_channels_;
  GlobalLayerNorm norm_in_{nullptr};
  torch::nn::Conv1d proj_in_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::Linear proj_out_{nullptr};
  torch::nn::Linear classifier_{nullptr};
};
TORCH_MODULE(AuxNet);

// v_n = [v_{n-1} : a_n] W + B with W of shape [2D x D]. Stored as a torch
// Linear, whose weight is W transposed ([D x 2D]).
class RefineLayerImpl : public torch::nn::Module {
 public:
  explicit RefineLayerImpl(int64_t embedding_dim);

  torch::Tensor forward(const torch::Tensor& previous, const torch::Tensor& fresh);

  // Overwrites W (given in the [2D x D] orientation) and B.
  void SetWeights(const torch::Tensor& w, const torch::Tensor& b);

  torch::nn::Linear fc() const { return fc_; }

 private:
  int64_t dim_;
  torch::nn::Linear fc_{nullptr};
};
TORCH_MODULE(RefineLayer);

}  // namespace irasep

#endif  // IRASEP_AUXNET_H_
