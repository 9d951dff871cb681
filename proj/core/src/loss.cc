// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/loss.h"

#include "irasep/error.h"

namespace irasep {

torch::Tensor SiSdrTensor(const torch::Tensor& est, const torch::Tensor& ref, double eps) {
  if (est.sizes() != ref.sizes() || est.dim() != 2) {
    throw Error("invalid_argument", "SI-SDR expects equal [B, T] tensors");
  }
  auto e = est - est.mean(1, true);
  auto r = ref - ref.mean(1, true);
  auto alpha = (e * r).sum(1, true) / ((r * r).sum(1, true) + eps);
  auto target = alpha * r;
  auto noise = target - e;
  return 10.0 * torch::log10(((target * target).sum(1) + eps) / ((noise * noise).sum(1) + eps));
}

LossTerms MultitaskLoss(const torch::Tensor& est, const torch::Tensor& target,
                        const torch::Tensor& log_probs, const torch::Tensor& labels,
                        double lambda) {
  LossTerms t;
  t.si_sdr_loss = -SiSdrTensor(est, target).mean();
  if (lambda == 0.0) {
    t.ce_loss = torch::zeros({}, est.options());
    t.total = t.si_sdr_loss;
    return t;
  }
  if (labels.numel() > 0 &&
      (labels.min().item<int64_t>() < 0 || labels.max().item<int64_t>() >= log_probs.size(1))) {
    throw Error("invalid_argument", "speaker label out of range");
  }
  t.ce_loss = torch::nll_loss(log_probs, labels);
  t.total = t.si_sdr_loss + lambda * t.ce_loss;
  return t;
}

}  // namespace irasep
