// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/model.h"

#include <gtest/gtest.h>

#include "irasep/error.h"
#include "irasep/layers.h"

namespace irasep {
namespace {

ModelConfig ToyConfig(int64_t n) {
  ModelConfig cfg;
  cfg.encoder = {8, 10};
  cfg.aux.resnet_blocks = 1;
  cfg.aux.block_channels = 12;
  cfg.aux.embedding_dim = 6;
  cfg.aux.num_speakers = 4;
  cfg.extractor = {1, 6, 8, 10};
  cfg.ira_iterations = n;
  return cfg;
}

AudioSegment Noise(int64_t n, double scale, uint64_t seed) {
  torch::manual_seed(seed);
  const auto t = torch::randn({n}, torch::kDouble) * scale;
  return ToAudio(t);
}

void ForceRefine(SpeakerExtractor& model, bool add_fresh) {
  const int64_t d = model->config().aux.embedding_dim;
  const auto eye = torch::eye(d, torch::kDouble);
  const auto lower = add_fresh ? eye : torch::zeros({d, d}, torch::kDouble);
  model->refine()->SetWeights(torch::cat({eye, lower}, 0).to(model->parameters()[0].dtype()),
                              torch::zeros({d}, model->parameters()[0].dtype()));
}

TEST(ModelTest, ResultLengths) {
  auto cfg = FullModelConfig(2, 10);
  cfg.extractor.dprnn_blocks = 1;  // keep it quick
  SpeakerExtractor model(cfg);
  const auto mix = Noise(4000, 0.1, 1);
  const auto ref = Noise(3000, 0.1, 2);
  const auto r0 = model->Extract(mix, ref, 0);
  EXPECT_EQ(r0.iterations.size(), 1u);
  const auto r2 = model->Extract(mix, ref, 2);
  ASSERT_EQ(r2.iterations.size(), 3u);
  for (const auto& it : r2.iterations) {
    EXPECT_EQ(it.embedding.size(0), 128);
    EXPECT_EQ(it.estimate.size(), mix.size());
    EXPECT_EQ(it.mask.sizes(), it.latent.sizes());
  }
}

TEST(ModelTest, BaseModelHasNoRefinement) {
  SpeakerExtractor base(ToyConfig(0));
  EXPECT_FALSE(base->has_refine());
  EXPECT_THROW(base->Forward(torch::randn({1, 100}), torch::randn({1, 80}), 1), Error);
  SpeakerExtractor ira(ToyConfig(1));
  EXPECT_TRUE(ira->has_refine());
}

TEST(ModelTest, IterationZeroIgnoresRefinement) {
  SpeakerExtractor model(ToyConfig(1));
  model->to(torch::kDouble);
  const auto mix = Noise(200, 0.2, 3);
  const auto ref = Noise(160, 0.2, 4);
  const auto before = model->Extract(mix, ref, 0).final_estimate();
  {
    torch::NoGradGuard ng;
    for (auto& p : model->refine()->parameters()) p.normal_();
  }
  EXPECT_EQ(model->Extract(mix, ref, 0).final_estimate(), before);
  // and matches the first entry of a longer run
  EXPECT_EQ(model->Extract(mix, ref, 2).iterations[0].estimate, before);
}

TEST(ModelTest, FrozenRefinementRepeatsEstimate) {
  SpeakerExtractor model(ToyConfig(3));
  model->to(torch::kDouble);
  ForceRefine(model, false);
  const auto r = model->Extract(Noise(300, 0.2, 5), Noise(200, 0.2, 6), 3);
  for (std::size_t i = 1; i < r.iterations.size(); ++i) {
    EXPECT_TRUE(torch::equal(r.iterations[i].embedding, r.iterations[0].embedding));
    EXPECT_EQ(r.iterations[i].estimate, r.iterations[0].estimate);
  }
}

TEST(ModelTest, IdentityRefinementEqualsGenericIra) {
  SpeakerExtractor model(ToyConfig(2));
  model->to(torch::kDouble);
  model->eval();
  ForceRefine(model, true);
  torch::NoGradGuard ng;
  for (int trial = 0; trial < 5; ++trial) {
    const auto mix = ToTensor(Noise(240, 0.3, 20 + trial), torch::kDouble).unsqueeze(0);
    const auto ref = ToTensor(Noise(200, 0.3, 40 + trial), torch::kDouble).unsqueeze(0);
    const auto mix_e = model->encoder()->forward(mix);
    const auto extract = [&](const torch::Tensor& y, const torch::Tensor& a) {
      return ApplyMask(y, model->extractor()->EstimateMask(a, y));
    };
    const auto aux = [&](const torch::Tensor& x) { return model->aux()->Embed(x); };
    const auto latent =
        GenericIra(mix_e, model->encoder()->forward(ref), extract, aux, GenericIraConfig{1.0, 2});
    const auto generic = model->decoder()->forward(latent, 240);
    const auto concrete = model->Forward(mix, ref, 2).final_estimate();
    ASSERT_TRUE(torch::equal(generic, concrete));
  }
}

TEST(GenericIraTest, ZeroMuIsSingleShot) {
  const auto aux = [](double x) { return 2.0 * x + 1.0; };
  const auto extract = [](double y, double a) { return y * a - 0.5; };
  const double single = extract(3.0, aux(0.7));
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(GenericIra(3.0, 0.7, extract, aux, GenericIraConfig{0.0, n}), single);
  }
  EXPECT_THROW(GenericIra(3.0, 0.7, extract, aux, GenericIraConfig{1.0, 0}), Error);
}

TEST(GenericIraTest, LinearToyOneIteration) {
  // A(x) = 2x, F(y|a) = y + a; y = 1, r = 3, mu = 0.5:
  // a0 = 6, x0 = 7, a1 = 6 + 0.5 * 14 = 13, x1 = 14.
  const auto aux = [](double x) { return 2.0 * x; };
  const auto extract = [](double y, double a) { return y + a; };
  EXPECT_EQ(GenericIra(1.0, 3.0, extract, aux, GenericIraConfig{0.5, 1}), 14.0);
}

TEST(ParameterCountTest, RefinementDelta) {
  const auto base = FullModelConfig(0, 101);
  const auto ira = FullModelConfig(1, 101);
  EXPECT_EQ(CountParameters(*SpeakerExtractor(ira)) - CountParameters(*SpeakerExtractor(base)),
            32896);
  auto small = ToyConfig(0);
  small.aux.embedding_dim = 12;
  auto small_ira = small;
  small_ira.ira_iterations = 1;
  EXPECT_EQ(CountParameters(*SpeakerExtractor(small_ira)) - CountParameters(*SpeakerExtractor(small)),
            2 * 12 * 12 + 12);
  // the count does not depend on n beyond 1
  small_ira.ira_iterations = 2;
  EXPECT_EQ(CountParameters(*SpeakerExtractor(small_ira)) - CountParameters(*SpeakerExtractor(small)),
            2 * 12 * 12 + 12);
  torch::nn::Module empty;
  EXPECT_EQ(CountParameters(empty), 0);
}

TEST(ParameterCountTest, FullSizeNearTarget) {
  const double base = static_cast<double>(CountParameters(*SpeakerExtractor(FullModelConfig(0, 101))));
  const double ira = static_cast<double>(CountParameters(*SpeakerExtractor(FullModelConfig(1, 101))));
  EXPECT_NEAR(base / 2.91e6, 1.0, 0.15);
  EXPECT_NEAR(ira / 2.94e6, 1.0, 0.15);
}

TEST(ModelTest, Determinism) {
  SpeakerExtractor model(ToyConfig(1));
  const auto mix = Noise(200, 0.2, 7);
  const auto ref = Noise(160, 0.2, 8);
  EXPECT_EQ(model->Extract(mix, ref, 1).final_estimate(), model->Extract(mix, ref, 1).final_estimate());
}

TEST(ModelTest, InputErrors) {
  SpeakerExtractor model(ToyConfig(1));
  AudioSegment bad_rate = Noise(200, 0.1, 1);
  bad_rate.sample_rate = 16000;
  EXPECT_THROW(model->Extract(bad_rate, Noise(100, 0.1, 2), 1), Error);
  EXPECT_THROW(model->Extract(Noise(200, 0.1, 1), Noise(7, 0.1, 2), 1), Error);
  EXPECT_THROW(model->Forward(torch::randn({2, 100}), torch::randn({1, 80}), 0), Error);
}

TEST(ModelConfigTest, JsonRoundTrip) {
  auto cfg = ToyConfig(2);
  cfg.lambda = 0.25;
  cfg.loss_all_iterations = true;
  EXPECT_EQ(ModelConfigFromJson(ToJson(cfg)), cfg);
  auto j = ToJson(cfg);
  j["bogus"] = 1;
  EXPECT_THROW(ModelConfigFromJson(j), Error);
  cfg.ira_iterations = -1;
  EXPECT_THROW(cfg.Validate(), Error);
  EXPECT_EQ(FullModelConfig(0, 0).extractor.chunk_size, 90);
}

}  // namespace
}  // namespace irasep
