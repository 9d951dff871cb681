// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/extractor.h"

#include <cmath>

#include "irasep/error.h"

namespace irasep {

void ExtractorConfig::Validate() const {
  if (dprnn_blocks < 1) throw Error("config", "dprnn_blocks must be >= 1");
  if (rnn_hidden < 1) throw Error("config", "rnn_hidden must be >= 1");
  if (chunk_size < 2 || chunk_size % 2 != 0) {
    throw Error("config", "chunk_size must be even and >= 2");
  }
  if (feature_dim < 1) throw Error("config", "feature_dim must be >= 1");
}

int64_t DefaultChunkSize(int64_t num_frames) {
  const double root = std::sqrt(2.0 * static_cast<double>(num_frames));
  const auto even = static_cast<int64_t>(std::llround(root / 2.0)) * 2;
  return std::max<int64_t>(2, even);
}

int64_t NumChunks(int64_t num_frames, int64_t chunk_size) {
  const int64_t hop = chunk_size / 2;
  return (num_frames + hop - 1) / hop;
}

torch::Tensor ChunkSegment(const torch::Tensor& frames, int64_t chunk_size) {
  if (chunk_size < 2 || chunk_size % 2 != 0) {
    throw Error("invalid_argument", "chunk size must be even and >= 2");
  }
  if (frames.dim() != 3) throw Error("invalid_argument", "ChunkSegment expects [B, F, K]");
  const int64_t k = frames.size(2);
  const int64_t hop = chunk_size / 2;
  const int64_t p = NumChunks(k, chunk_size);
  const int64_t padded = (p - 1) * hop + chunk_size;
  auto x = torch::constant_pad_nd(frames, {0, padded - k});
  // unfold: [B, F, P, S] -> [B, F, S, P]
  return x.unfold(2, chunk_size, hop).transpose(2, 3).contiguous();
}

torch::Tensor OverlapAddChunks(const torch::Tensor& chunks, int64_t num_frames) {
  if (chunks.dim() != 4) throw Error("invalid_argument", "OverlapAddChunks expects [B, F, S, P]");
  const int64_t b = chunks.size(0), f = chunks.size(1), s = chunks.size(2), p = chunks.size(3);
  const int64_t hop = s / 2;
  if (s % 2 != 0 || NumChunks(num_frames, s) != p) {
    throw Error("invalid_argument", "chunk layout does not match frame count");
  }
  // Each chunk is two halves: the first lands at p*hop, the second at
  // (p+1)*hop.
  auto x = chunks.permute({0, 1, 3, 2});  // [B, F, P, S]
  auto first = x.narrow(3, 0, hop).reshape({b, f, p * hop});
  auto second = x.narrow(3, hop, hop).reshape({b, f, p * hop});
  auto sum = torch::constant_pad_nd(first, {0, hop}) + torch::constant_pad_nd(second, {hop, 0});
  auto count = torch::full({(p + 1) * hop}, 2.0, chunks.options());
  count.narrow(0, 0, hop).fill_(1.0);
  count.narrow(0, p * hop, hop).fill_(1.0);
  return (sum / count).narrow(2, 0, num_frames);
}

DprnnBlockImpl::DprnnBlockImpl(int64_t feature_dim, int64_t hidden) {
  auto rnn = [&] {
    return torch::nn::LSTM(
        torch::nn::LSTMOptions(feature_dim, hidden).bidirectional(true).batch_first(true));
  };
  intra_rnn_ = register_module("intra_rnn", rnn());
  intra_fc_ = register_module("intra_fc", torch::nn::Linear(2 * hidden, feature_dim));
  intra_norm_ = register_module("intra_norm", GlobalLayerNorm(feature_dim));
  inter_rnn_ = register_module("inter_rnn", rnn());
  inter_fc_ = register_module("inter_fc", torch::nn::Linear(2 * hidden, feature_dim));
  inter_norm_ = register_module("inter_norm", GlobalLayerNorm(feature_dim));
}

torch::Tensor DprnnBlockImpl::forward(const torch::Tensor& chunks) {
  const int64_t b = chunks.size(0), f = chunks.size(1), s = chunks.size(2), p = chunks.size(3);
  // intra: sequences of length S, one per (batch, chunk)
  auto y = chunks.permute({0, 3, 2, 1}).reshape({b * p, s, f});
  y = intra_fc_->forward(std::get<0>(intra_rnn_->forward(y)));
  y = y.reshape({b, p, s, f}).permute({0, 3, 2, 1});
  auto x = chunks + intra_norm_->forward(y);
  // inter: sequences of length P, one per (batch, position within chunk)
  y = x.permute({0, 2, 3, 1}).reshape({b * s, p, f});
  y = inter_fc_->forward(std::get<0>(inter_rnn_->forward(y)));
  y = y.reshape({b, s, p, f}).permute({0, 3, 1, 2});
  return x + inter_norm_->forward(y);
}

ExtractorImpl::ExtractorImpl(int64_t latent_channels, int64_t embedding_dim,
                             const ExtractorConfig& config)
    : config_(config), latent_channels_(latent_channels), embedding_dim_(embedding_dim) {
  config_.Validate();
  mix_norm_ = register_module("mix_norm", GlobalLayerNorm(latent_channels));
  bottleneck_ = register_module(
      "bottleneck", torch::nn::Conv1d(torch::nn::Conv1dOptions(
                        embedding_dim + latent_channels, config_.feature_dim, 1)));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int64_t i = 0; i < config_.dprnn_blocks; ++i) {
    blocks_->push_back(DprnnBlock(config_.feature_dim, config_.rnn_hidden));
  }
  out_act_ = register_module("out_act", torch::nn::PReLU());
  mask_conv_ = register_module(
      "mask_conv",
      torch::nn::Conv1d(torch::nn::Conv1dOptions(config_.feature_dim, latent_channels, 1)));
}

torch::Tensor ExtractorImpl::EstimateMask(const torch::Tensor& embedding,
                                          const torch::Tensor& mix_latent) {
  if (mix_latent.dim() != 3 || mix_latent.size(1) != latent_channels_) {
    throw Error("invalid_argument", "extractor expects Mix_E of shape [B, " +
                                        std::to_string(latent_channels_) + ", K]");
  }
  if (embedding.dim() != 2 || embedding.size(1) != embedding_dim_ ||
      embedding.size(0) != mix_latent.size(0)) {
    throw Error("invalid_argument", "speaker embedding must be [B, " +
                                        std::to_string(embedding_dim_) + "]");
  }
  const int64_t k = mix_latent.size(2);
  auto v = embedding.unsqueeze(2).expand({-1, -1, k});
  auto x = bottleneck_->forward(torch::cat({v, mix_norm_->forward(mix_latent)}, 1));
  x = ChunkSegment(x, config_.chunk_size);
  for (const auto& block : *blocks_) x = block->as<DprnnBlock>()->forward(x);
  x = OverlapAddChunks(out_act_->forward(x), k);
  return torch::relu(mask_conv_->forward(x));
}

torch::Tensor ApplyMask(const torch::Tensor& mix_latent, const torch::Tensor& mask) {
  if (mix_latent.sizes() != mask.sizes()) {
    throw Error("invalid_argument", "mask shape does not match Mix_E");
  }
  return mix_latent * mask;
}

}  // namespace irasep
