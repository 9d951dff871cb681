// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_LOSS_H_
#define IRASEP_LOSS_H_

#include <torch/torch.h>

namespace irasep {

// Differentiable SI-SDR in dB per row of [B, T] tensors (mean-centred).
// eps keeps the logarithm finite for silent or perfect estimates.
torch::Tensor SiSdrTensor(const torch::Tensor& est, const torch::Tensor& ref,
                          double eps = 1e-8);

struct LossTerms {
  torch::Tensor total;
  torch::Tensor si_sdr_loss;  // mean of -SI-SDR
  torch::Tensor ce_loss;      // mean CE (zero tensor when lambda == 0)
};

// -mean SI-SDR(est, target) + lambda * mean CE(log_probs, labels).
// With lambda == 0 the CE term is not part of the graph at all.
LossTerms MultitaskLoss(const torch::Tensor& est, const torch::Tensor& target,
                        const torch::Tensor& log_probs, const torch::Tensor& labels,
                        double lambda);

}  // namespace irasep

#endif  // IRASEP_LOSS_H_
