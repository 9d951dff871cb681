// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/codec.h"

#include "irasep/error.h"

namespace irasep {

void EncoderConfig::Validate() const {
  if (filter_length < 2 || filter_length % 2 != 0) {
    throw Error("config", "filter_length must be even and >= 2");
  }
  if (channels < 1) throw Error("config", "encoder channels must be >= 1");
}

int64_t NumFrames(int64_t num_samples, const EncoderConfig& config) {
  if (num_samples < config.filter_length) {
    throw Error("invalid_argument", "input of " + std::to_string(num_samples) +
                                        " samples is shorter than filter length " +
                                        std::to_string(config.filter_length));
  }
  return (num_samples - config.filter_length) / config.stride() + 1;
}

EncoderImpl::EncoderImpl(const EncoderConfig& config) : config_(config) {
  config_.Validate();
  conv_ = register_module(
      "conv", torch::nn::Conv1d(torch::nn::Conv1dOptions(1, config_.channels, config_.filter_length)
                                    .stride(config_.stride())
                                    .bias(false)));
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& waveform) {
  if (waveform.dim() != 2) throw Error("invalid_argument", "encoder expects [B, T]");
  NumFrames(waveform.size(1), config_);
  return torch::relu(conv_->forward(waveform.unsqueeze(1)));
}

DecoderImpl::DecoderImpl(const EncoderConfig& config) : config_(config) {
  config_.Validate();
  deconv_ = register_module(
      "deconv",
      torch::nn::ConvTranspose1d(
          torch::nn::ConvTranspose1dOptions(config_.channels, 1, config_.filter_length)
              .stride(config_.stride())
              .bias(false)));
}

int64_t DecoderImpl::OutputLength(int64_t num_frames) const {
  return (num_frames - 1) * config_.stride() + config_.filter_length;
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& latent, int64_t num_samples) {
  if (latent.dim() != 3 || latent.size(1) != config_.channels) {
    throw Error("invalid_argument", "decoder expects [B, N, K] with N = " +
                                        std::to_string(config_.channels));
  }
  auto wav = deconv_->forward(latent).squeeze(1);
  const int64_t produced = wav.size(1);
  if (produced > num_samples) {
    return wav.narrow(1, 0, num_samples);
  }
  if (produced < num_samples) {
    return torch::constant_pad_nd(wav, {0, num_samples - produced});
  }
  return wav;
}

}  // namespace irasep
