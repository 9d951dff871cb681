// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/auxnet.h"

#include "irasep/error.h"

namespace irasep {

void AuxConfig::Validate() const {
  if (resnet_blocks < 1) throw Error("config", "resnet_blocks must be >= 1");
  if (block_channels < 1) throw Error("config", "block_channels must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw Error("config", "aux kernel_size must be odd");
  }
  if (embedding_dim < 1) throw Error("config", "embedding_dim must be >= 1");
  if (num_speakers < 0) throw Error("config", "num_speakers must be >= 0");
}

namespace {

torch::nn::Conv1d TimeConv(int64_t channels, int64_t kernel_size) {
  return torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, channels, kernel_size)
                               .padding(kernel_size / 2)
                               .padding_mode(torch::kReplicate)
                               .bias(false));
}

}  // namespace

ResBlockImpl::ResBlockImpl(int64_t channels, int64_t kernel_size) {
  conv1_ = register_module("conv1", TimeConv(channels, kernel_size));
  norm1_ = register_module("norm1", GlobalLayerNorm(channels));
  act1_ = register_module("act1", torch::nn::PReLU());
  conv2_ = register_module("conv2", TimeConv(channels, kernel_size));
  norm2_ = register_module("norm2", GlobalLayerNorm(channels));
  act2_ = register_module("act2", torch::nn::PReLU());
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  auto y = act1_->forward(norm1_->forward(conv1_->forward(x)));
  y = norm2_->forward(conv2_->forward(y));
  return act2_->forward(y + x);
}

AuxNetImpl::AuxNetImpl(int64_t in_channels, const AuxConfig& config)
    : config_(config), in_channels_(in_channels) {
  config_.Validate();
  norm_in_ = register_module("norm_in", GlobalLayerNorm(in_channels));
  proj_in_ = register_module(
      "proj_in", torch::nn::Conv1d(torch::nn::Conv1dOptions(in_channels, config_.block_channels, 1)));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int64_t i = 0; i < config_.resnet_blocks; ++i) {
    blocks_->push_back(ResBlock(config_.block_channels, config_.kernel_size));
  }
  proj_out_ = register_module(
      "proj_out", torch::nn::Linear(config_.block_channels, config_.embedding_dim));
  if (config_.num_speakers > 0) {
    classifier_ = register_module(
        "classifier", torch::nn::Linear(config_.embedding_dim, config_.num_speakers));
  }
}

torch::Tensor AuxNetImpl::Embed(const torch::Tensor& frames) {
  if (frames.dim() != 3 || frames.size(1) != in_channels_) {
    throw Error("invalid_argument", "aux network expects [B, " +
                                        std::to_string(in_channels_) + ", K]");
  }
  if (frames.size(2) < 1) throw Error("invalid_argument", "aux network got zero frames");
  auto x = proj_in_->forward(norm_in_->forward(frames));
  for (const auto& block : *blocks_) x = block->as<ResBlock>()->forward(x);
  return proj_out_->forward(x.mean(2));
}

torch::Tensor AuxNetImpl::Logits(const torch::Tensor& embedding) {
  if (classifier_.is_empty()) throw Error("config", "aux network has no classifier head");
  if (embedding.dim() != 2 || embedding.size(1) != config_.embedding_dim) {
    throw Error("invalid_argument", "embedding dimension mismatch");
  }
  return classifier_->forward(embedding);
}

torch::Tensor AuxNetImpl::Classify(const torch::Tensor& embedding) {
  return torch::log_softmax(Logits(embedding), 1);
}

RefineLayerImpl::RefineLayerImpl(int64_t embedding_dim) : dim_(embedding_dim) {
  fc_ = register_module("fc", torch::nn::Linear(2 * embedding_dim, embedding_dim));
}

torch::Tensor RefineLayerImpl::forward(const torch::Tensor& previous,
                                       const torch::Tensor& fresh) {
  if (previous.dim() != 2 || fresh.dim() != 2 || previous.size(1) != dim_ ||
      fresh.size(1) != dim_) {
    throw Error("invalid_argument", "refinement expects two [B, " + std::to_string(dim_) +
                                        "] embeddings");
  }
  return fc_->forward(torch::cat({previous, fresh}, 1));
}

void RefineLayerImpl::SetWeights(const torch::Tensor& w, const torch::Tensor& b) {
  if (w.sizes() != torch::IntArrayRef({2 * dim_, dim_}) || b.sizes() != torch::IntArrayRef({dim_})) {
    throw Error("invalid_argument", "refinement weights must be [2D x D] and [D]");
  }
  torch::NoGradGuard guard;
  fc_->weight.copy_(w.t());
  fc_->bias.copy_(b);
}

}  // namespace irasep
