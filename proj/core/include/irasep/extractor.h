// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_EXTRACTOR_H_
#define IRASEP_EXTRACTOR_H_

#include <torch/torch.h>

#include "irasep/layers.h"

namespace irasep {

struct ExtractorConfig {
  int64_t dprnn_blocks = 6;
  int64_t rnn_hidden = 128;  // per direction
  int64_t chunk_size = 90;   // S, even
  int64_t feature_dim = 64;  // F

  void Validate() const;
  bool operator==(const ExtractorConfig&) const = default;
};

// Nearest even integer to sqrt(2 K), at least 2.
int64_t DefaultChunkSize(int64_t num_frames);

// Number of 50%-overlapping chunks: ceil(K / (S / 2)).
int64_t NumChunks(int64_t num_frames, int64_t chunk_size);

// [B, F, K] -> [B, F, S, P]. Chunk p covers frames [p S/2, p S/2 + S); the
// tail is zero-padded.
torch::Tensor ChunkSegment(const torch::Tensor& frames, int64_t chunk_size);

// Inverse of ChunkSegment: overlap-add, divide by the number of chunks that
// cover each frame, trim to num_frames.
torch::Tensor OverlapAddChunks(const torch::Tensor& chunks, int64_t num_frames);

// Intra-chunk BLSTM then inter-chunk BLSTM; each followed by a linear
// projection back to F, gLN and a residual connection. Takes only the chunk
// tensor: the speaker embedding enters the extractor once, before block 1.
class DprnnBlockImpl : public torch::nn::Module {
 public:
  DprnnBlockImpl(int64_t feature_dim, int64_t hidden);

  torch::Tensor forward(const torch::Tensor& chunks);

 private:
  torch::nn::LSTM intra_rnn_{nullptr}, inter_rnn_{nullptr};
  torch::nn::Linear intra_fc_{nullptr}, inter_fc_{nullptr};
  GlobalLayerNorm intra_norm_{nullptr}, inter_norm_{nullptr};
};
TORCH_MODULE(DprnnBlock);

// Mask estimator m = E([v : norm(Mix_E)]).
class ExtractorImpl : public torch::nn::Module {
 public:
  ExtractorImpl(int64_t latent_channels, int64_t embedding_dim,
                const ExtractorConfig& config);

  // embedding [B, D], mix_latent [B, N, K] -> non-negative mask [B, N, K].
  torch::Tensor EstimateMask(const torch::Tensor& embedding,
                             const torch::Tensor& mix_latent);

  const ExtractorConfig& config() const { return config_; }
  int64_t num_blocks() const { return static_cast<int64_t>(blocks_->size()); }

 private:
  ExtractorConfig config_;
  int64_t latent_channels_;
  int64_t embedding_dim_;
  GlobalLayerNorm mix_norm_{nullptr};
  torch::nn::Conv1d bottleneck_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::PReLU out_act_{nullptr};
  torch::nn::Conv1d mask_conv_{nullptr};
};
TORCH_MODULE(Extractor);

// d = Mix_E * m, element-wise; shapes must match.
torch::Tensor ApplyMask(const torch::Tensor& mix_latent, const torch::Tensor& mask);

}  // namespace irasep

#endif  // IRASEP_EXTRACTOR_H_
