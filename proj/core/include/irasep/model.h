// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_MODEL_H_
#define IRASEP_MODEL_H_

#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "irasep/audio.h"
#include "irasep/auxnet.h"
#include "irasep/codec.h"
#include "irasep/error.h"
#include "irasep/extractor.h"

namespace irasep {

struct ModelConfig {
  EncoderConfig encoder;
  AuxConfig aux;
  ExtractorConfig extractor;
  // Number of refinement passes. 0 is the plain network without the
  // refinement layer; >= 1 adds it.
  int64_t ira_iterations = 0;
  double lambda = 0.5;
  // Average the signal loss over every iteration instead of the last only.
  bool loss_all_iterations = false;
  // Also apply the speaker CE loss to refined embeddings v_1..v_n.
  bool ce_on_refined = false;

  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json ToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

// Full-size defaults (L = 16, 6 dual-path blocks, D = 128) with the given
// classifier size and a chunk size for 4 s segments.
ModelConfig FullModelConfig(int64_t ira_iterations, int64_t num_speakers);

// Batched per-iteration trace, iterations 0..n.
struct ExtractionTrace {
  std::vector<torch::Tensor> embeddings;  // [B, D]
  std::vector<torch::Tensor> masks;       // [B, N, K]
  std::vector<torch::Tensor> latents;     // [B, N, K]
  std::vector<torch::Tensor> estimates;   // [B, T]

  const torch::Tensor& final_estimate() const { return estimates.back(); }
};

struct IterationResult {
  torch::Tensor embedding;  // [D]
  torch::Tensor mask;       // [N, K]
  torch::Tensor latent;     // [N, K]
  AudioSegment estimate;
};

// One entry per iteration; the final estimate is the last one.
struct ExtractionResult {
  std::vector<IterationResult> iterations;

  const AudioSegment& final_estimate() const { return iterations.back().estimate; }
};

class SpeakerExtractorImpl : public torch::nn::Module {
 public:
  explicit SpeakerExtractorImpl(const ModelConfig& config);

  // mixture [B, T], reference [B, Tr]. `iterations` may differ from the
  // configured count (e.g. a model trained with n = 1 applied twice); any
  // value >= 1 needs the refinement layer.
  ExtractionTrace Forward(const torch::Tensor& mixture, const torch::Tensor& reference,
                          int64_t iterations);
  ExtractionTrace Forward(const torch::Tensor& mixture, const torch::Tensor& reference) {
    return Forward(mixture, reference, config_.ira_iterations);
  }

  // Single-example inference without autograd.
  ExtractionResult Extract(const AudioSegment& mixture, const AudioSegment& reference,
                           int64_t iterations);

  const ModelConfig& config() const { return config_; }
  Encoder encoder() const { return encoder_; }
  Decoder decoder() const { return decoder_; }
  AuxNet aux() const { return aux_; }
  Extractor extractor() const { return extractor_; }
  RefineLayer refine() const { return refine_; }
  bool has_refine() const { return !refine_.is_empty(); }

 private:
  ModelConfig config_;
  Encoder encoder_{nullptr};
  Decoder decoder_{nullptr};
  AuxNet aux_{nullptr};
  Extractor extractor_{nullptr};
  RefineLayer refine_{nullptr};
};
TORCH_MODULE(SpeakerExtractor);

torch::Tensor ToTensor(const AudioSegment& audio,
                       torch::ScalarType dtype = torch::kFloat);
AudioSegment ToAudio(const torch::Tensor& samples);

struct GenericIraConfig {
  double mu = 1.0;
  int iterations = 1;
};

// a_0 = A(r), x_0 = F(y | a_0); then for each iteration
// a_n = a_{n-1} + mu A(x_{n-1}), x_n = F(y | a_n). Returns x_n.
// `extract(y, a)` and `aux(x)` are arbitrary callables; the condition type
// needs `+` and scalar `*`.
template <typename Input, typename Reference, typename ExtractFn, typename AuxFn>
auto GenericIra(const Input& y, const Reference& r, ExtractFn&& extract, AuxFn&& aux,
                const GenericIraConfig& config) {
  if (config.iterations < 1) throw Error("invalid_argument", "IRA needs >= 1 iteration");
  auto condition = aux(r);
  auto estimate = extract(y, condition);
  for (int i = 0; i < config.iterations; ++i) {
    condition = condition + config.mu * aux(estimate);
    estimate = extract(y, condition);
  }
  return estimate;
}

}  // namespace irasep

#endif  // IRASEP_MODEL_H_
