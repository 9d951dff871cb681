// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/layers.h"

#include "irasep/error.h"

namespace irasep {

GlobalLayerNormImpl::GlobalLayerNormImpl(int64_t channels, double eps)
    : channels_(channels), eps_(eps) {
  gain_ = register_parameter("gain", torch::ones({channels}));
  bias_ = register_parameter("bias", torch::zeros({channels}));
}

torch::Tensor GlobalLayerNormImpl::forward(const torch::Tensor& x) {
  if (x.dim() < 3 || x.size(1) != channels_) {
    throw Error("invalid_argument", "GlobalLayerNorm expects [B, " +
                                        std::to_string(channels_) + ", ...]");
  }
  std::vector<int64_t> dims;
  for (int64_t d = 1; d < x.dim(); ++d) dims.push_back(d);
  auto mean = x.mean(dims, /*keepdim=*/true);
  auto var = (x - mean).pow(2).mean(dims, /*keepdim=*/true);
  std::vector<int64_t> shape(static_cast<std::size_t>(x.dim()), 1);
  shape[1] = channels_;
  return (x - mean) / torch::sqrt(var + eps_) * gain_.view(shape) + bias_.view(shape);
}

int64_t CountParameters(const torch::nn::Module& module) {
  int64_t total = 0;
  for (const auto& p : module.parameters(/*recurse=*/true)) total += p.numel();
  return total;
}

}  // namespace irasep
