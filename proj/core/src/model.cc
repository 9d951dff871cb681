// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/model.h"

namespace irasep {

void ModelConfig::Validate() const {
  encoder.Validate();
  aux.Validate();
  extractor.Validate();
  if (ira_iterations < 0) throw Error("config", "ira_iterations must be >= 0");
  if (!(lambda >= 0)) throw Error("config", "lambda must be >= 0");
}

nlohmann::json ToJson(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["filter_length"] = c.encoder.filter_length;
  j["encoder_channels"] = c.encoder.channels;
  j["resnet_blocks"] = c.aux.resnet_blocks;
  j["aux_channels"] = c.aux.block_channels;
  j["aux_kernel_size"] = c.aux.kernel_size;
  j["embedding_dim"] = c.aux.embedding_dim;
  j["num_speakers"] = c.aux.num_speakers;
  j["dprnn_blocks"] = c.extractor.dprnn_blocks;
  j["rnn_hidden"] = c.extractor.rnn_hidden;
  j["chunk_size"] = c.extractor.chunk_size;
  j["feature_dim"] = c.extractor.feature_dim;
  j["ira_iterations"] = c.ira_iterations;
  j["lambda"] = c.lambda;
  j["loss_all_iterations"] = c.loss_all_iterations;
  j["ce_on_refined"] = c.ce_on_refined;
  return j;
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  static const char* const kKeys[] = {
      "filter_length", "encoder_channels", "resnet_blocks", "aux_channels",
      "aux_kernel_size", "embedding_dim", "num_speakers", "dprnn_blocks",
      "rnn_hidden", "chunk_size", "feature_dim", "ira_iterations", "lambda",
      "loss_all_iterations", "ce_on_refined"};
  if (!j.is_object()) throw Error("config", "model config must be an object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), item.key()) == std::end(kKeys)) {
      throw Error("config", "unknown model key: " + item.key());
    }
  }
  ModelConfig c;
  auto get = [&](const char* key, auto* out) {
    if (j.contains(key)) {
      try {
        j.at(key).get_to(*out);
      } catch (const nlohmann::json::exception&) {
        throw Error("config", std::string("bad value for model key ") + key);
      }
    }
  };
  get("filter_length", &c.encoder.filter_length);
  get("encoder_channels", &c.encoder.channels);
  get("resnet_blocks", &c.aux.resnet_blocks);
  get("aux_channels", &c.aux.block_channels);
  get("aux_kernel_size", &c.aux.kernel_size);
  get("embedding_dim", &c.aux.embedding_dim);
  get("num_speakers", &c.aux.num_speakers);
  get("dprnn_blocks", &c.extractor.dprnn_blocks);
  get("rnn_hidden", &c.extractor.rnn_hidden);
  get("chunk_size", &c.extractor.chunk_size);
  get("feature_dim", &c.extractor.feature_dim);
  get("ira_iterations", &c.ira_iterations);
  get("lambda", &c.lambda);
  get("loss_all_iterations", &c.loss_all_iterations);
  get("ce_on_refined", &c.ce_on_refined);
  c.Validate();
  return c;
}

ModelConfig FullModelConfig(int64_t ira_iterations, int64_t num_speakers) {
  ModelConfig c;
  c.encoder.filter_length = 16;
  c.encoder.channels = 64;
  c.aux.resnet_blocks = 3;
  c.aux.embedding_dim = 128;
  c.aux.num_speakers = num_speakers;
  c.extractor.dprnn_blocks = 6;
  c.extractor.rnn_hidden = 128;
  c.extractor.feature_dim = 64;
  c.extractor.chunk_size = DefaultChunkSize(NumFrames(4 * kSampleRate, c.encoder));
  c.ira_iterations = ira_iterations;
  c.lambda = 0.5;
  return c;
}

SpeakerExtractorImpl::SpeakerExtractorImpl(const ModelConfig& config) : config_(config) {
  config_.Validate();
  encoder_ = register_module("encoder", Encoder(config_.encoder));
  aux_ = register_module("aux", AuxNet(config_.encoder.channels, config_.aux));
  extractor_ = register_module(
      "extractor", Extractor(config_.encoder.channels, config_.aux.embedding_dim, config_.extractor));
  decoder_ = register_module("decoder", Decoder(config_.encoder));
  if (config_.ira_iterations >= 1) {
    refine_ = register_module("refine", RefineLayer(config_.aux.embedding_dim));
  }
}

ExtractionTrace SpeakerExtractorImpl::Forward(const torch::Tensor& mixture,
                                              const torch::Tensor& reference,
                                              int64_t iterations) {
  if (iterations < 0) throw Error("invalid_argument", "iterations must be >= 0");
  if (iterations > 0 && refine_.is_empty()) {
    throw Error("config", "model was built without the refinement layer (ira_iterations = 0)");
  }
  if (mixture.dim() != 2 || reference.dim() != 2 || mixture.size(0) != reference.size(0)) {
    throw Error("invalid_argument", "expected mixture [B, T] and reference [B, Tr]");
  }
  const int64_t num_samples = mixture.size(1);
  auto mix_latent = encoder_->forward(mixture);
  auto ref_latent = encoder_->forward(reference);

  ExtractionTrace trace;
  auto step = [&](const torch::Tensor& embedding) {
    auto mask = extractor_->EstimateMask(embedding, mix_latent);
    auto latent = ApplyMask(mix_latent, mask);
    trace.embeddings.push_back(embedding);
    trace.masks.push_back(mask);
    trace.latents.push_back(latent);
    trace.estimates.push_back(decoder_->forward(latent, num_samples));
  };
  step(aux_->Embed(ref_latent));
  for (int64_t i = 1; i <= iterations; ++i) {
    auto fresh = aux_->Embed(trace.latents.back());
    step(refine_->forward(trace.embeddings.back(), fresh));
  }
  return trace;
}

torch::Tensor ToTensor(const AudioSegment& audio, torch::ScalarType dtype) {
  auto t = torch::empty({static_cast<int64_t>(audio.size())}, torch::kDouble);
  std::copy(audio.samples.begin(), audio.samples.end(), t.data_ptr<double>());
  return t.to(dtype);
}

AudioSegment ToAudio(const torch::Tensor& samples) {
  auto t = samples.detach().to(torch::kDouble).contiguous().reshape({-1});
  AudioSegment a;
  a.samples.assign(t.data_ptr<double>(), t.data_ptr<double>() + t.numel());
  return a;
}

ExtractionResult SpeakerExtractorImpl::Extract(const AudioSegment& mixture,
                                               const AudioSegment& reference,
                                               int64_t iterations) {
  CheckAudio(mixture);
  CheckAudio(reference);
  if (static_cast<int64_t>(reference.size()) < config_.encoder.filter_length) {
    throw Error("invalid_argument", "reference shorter than the encoder filter");
  }
  torch::NoGradGuard no_grad;
  const bool was_training = is_training();
  eval();
  const auto dtype = parameters().front().scalar_type();
  auto trace = Forward(ToTensor(mixture, dtype).unsqueeze(0),
                       ToTensor(reference, dtype).unsqueeze(0), iterations);
  train(was_training);
  ExtractionResult result;
  for (std::size_t i = 0; i < trace.estimates.size(); ++i) {
    IterationResult it;
    it.embedding = trace.embeddings[i][0];
    it.mask = trace.masks[i][0];
    it.latent = trace.latents[i][0];
    it.estimate = ToAudio(trace.estimates[i][0]);
    result.iterations.push_back(std::move(it));
  }
  return result;
}

}  // namespace irasep
