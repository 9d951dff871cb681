// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_LAYERS_H_
#define IRASEP_LAYERS_H_

#include <torch/torch.h>

namespace irasep {

// Global layer normalization: statistics over every non-batch dimension of a
// [B, C, ...] tensor, learned per-channel gain and bias. No running
// statistics, so training and inference behave identically.
class GlobalLayerNormImpl : public torch::nn::Module {
 public:
  explicit GlobalLayerNormImpl(int64_t channels, double eps = 1e-8);

  torch::Tensor forward(const torch::Tensor& x);

  int64_t channels() const { return channels_; }

 private:
  int64_t channels_;
  double eps_;
  torch::Tensor gain_;
  torch::Tensor bias_;
};
TORCH_MODULE(GlobalLayerNorm);

int64_t CountParameters(const torch::nn::Module& module);

}  // namespace irasep

#endif  // IRASEP_LAYERS_H_
