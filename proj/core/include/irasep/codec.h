// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_CODEC_H_
#define IRASEP_CODEC_H_

#include <torch/torch.h>

namespace irasep {

struct EncoderConfig {
  int64_t filter_length = 16;  // L, even
  int64_t channels = 64;       // N

  int64_t stride() const { return filter_length / 2; }
  void Validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// floor((T - L) / (L / 2)) + 1; throws when T < L.
int64_t NumFrames(int64_t num_samples, const EncoderConfig& config);

// Learned filterbank: strided 1-D convolution (length L, stride L/2, no
// bias) followed by ReLU. One instance encodes both the mixture and the
// reference. [B, T] -> [B, N, K].
class EncoderImpl : public torch::nn::Module {
 public:
  explicit EncoderImpl(const EncoderConfig& config);

  torch::Tensor forward(const torch::Tensor& waveform);

  const EncoderConfig& config() const { return config_; }

 private:
  EncoderConfig config_;
  torch::nn::Conv1d conv_{nullptr};
};
TORCH_MODULE(Encoder);

// Transposed convolution with overlap-and-sum at stride L/2; linear.
// [B, N, K] -> [B, num_samples]. Samples past the last frame are zero.
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const EncoderConfig& config);

  torch::Tensor forward(const torch::Tensor& latent, int64_t num_samples);

  // Natural output length (K - 1) * L/2 + L.
  int64_t OutputLength(int64_t num_frames) const;

 private:
  EncoderConfig config_;
  torch::nn::ConvTranspose1d deconv_{nullptr};
};
TORCH_MODULE(Decoder);

}  // namespace irasep

#endif  // IRASEP_CODEC_H_
