// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/auxnet.h"

#include <gtest/gtest.h>

#include "irasep/error.h"

namespace irasep {
namespace {

AuxConfig SmallAux(int64_t speakers = 0) {
  AuxConfig cfg;
  cfg.resnet_blocks = 2;
  cfg.block_channels = 16;
  cfg.embedding_dim = 12;
  cfg.num_speakers = speakers;
  return cfg;
}

TEST(AuxNetTest, EmbeddingShape) {
  AuxNet aux(64, AuxConfig{});
  aux->eval();
  EXPECT_EQ(aux->Embed(torch::rand({3, 64, 50})).sizes(), (std::vector<int64_t>{3, 128}));
  EXPECT_EQ(aux->Embed(torch::rand({1, 64, 1})).sizes(), (std::vector<int64_t>{1, 128}));
  EXPECT_THROW(aux->Embed(torch::rand({1, 32, 10})), Error);
}

TEST(AuxNetTest, ConstantFramesPoolToSameEmbedding) {
  // repeating one frame must not change the pooled embedding
  torch::manual_seed(3);
  AuxNet aux(8, SmallAux());
  aux->to(torch::kDouble);
  aux->eval();
  const auto frame = torch::rand({2, 8, 1}, torch::kDouble) + 0.1;
  const auto one = aux->Embed(frame);
  const auto five = aux->Embed(frame.expand({2, 8, 5}).contiguous());
  EXPECT_LT((one - five).abs().max().item<double>(), 1e-10);
}

TEST(AuxNetTest, ClassifierIsDistribution) {
  torch::manual_seed(4);
  AuxNet aux(8, SmallAux(7));
  ASSERT_TRUE(aux->has_classifier());
  const auto lp = aux->Classify(torch::randn({5, 12}));
  EXPECT_EQ(lp.sizes(), (std::vector<int64_t>{5, 7}));
  const auto sums = lp.exp().sum(1);
  EXPECT_LT((sums - 1).abs().max().item<float>(), 1e-6);
  EXPECT_LE(lp.max().item<float>(), 0.0f);

  torch::NoGradGuard ng;
  for (auto& p : aux->classifier()->parameters()) p.zero_();
  const auto uniform = aux->Classify(torch::randn({2, 12})).exp();
  EXPECT_LT((uniform - 1.0 / 7).abs().max().item<float>(), 1e-7);

  AuxNet headless(8, SmallAux(0));
  EXPECT_FALSE(headless->has_classifier());
  EXPECT_THROW(headless->Classify(torch::randn({1, 12})), Error);
}

TEST(RefineLayerTest, IdentityStacksSum) {
  RefineLayer refine(6);
  refine->to(torch::kDouble);
  const auto eye = torch::eye(6, torch::kDouble);
  refine->SetWeights(torch::cat({eye, eye}, 0), torch::zeros({6}, torch::kDouble));
  const auto prev = torch::randn({4, 6}, torch::kDouble);
  const auto fresh = torch::randn({4, 6}, torch::kDouble);
  EXPECT_TRUE(torch::equal(refine->forward(prev, fresh), prev + fresh));

  refine->SetWeights(torch::cat({eye, torch::zeros({6, 6}, torch::kDouble)}, 0),
                     torch::zeros({6}, torch::kDouble));
  EXPECT_TRUE(torch::equal(refine->forward(prev, fresh), prev));
}

TEST(RefineLayerTest, AffineInConcatenatedInput) {
  torch::manual_seed(5);
  RefineLayer refine(4);
  refine->to(torch::kDouble);
  const auto w = torch::randn({8, 4}, torch::kDouble);
  const auto b = torch::randn({4}, torch::kDouble);
  refine->SetWeights(w, b);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prev = torch::randn({1, 4}, torch::kDouble);
    const auto fresh = torch::randn({1, 4}, torch::kDouble);
    const auto expect = torch::matmul(torch::cat({prev, fresh}, 1), w) + b;
    ASSERT_LT((refine->forward(prev, fresh) - expect).abs().max().item<double>(), 1e-12);
  }
  EXPECT_THROW(refine->SetWeights(torch::zeros({4, 4}), torch::zeros({4})), Error);
  EXPECT_THROW(refine->forward(torch::zeros({1, 4}), torch::zeros({1, 3})), Error);
}

TEST(RefineLayerTest, ParameterCount) {
  EXPECT_EQ(CountParameters(*RefineLayer(128)), 32896);
  EXPECT_EQ(CountParameters(*RefineLayer(64)), 2 * 64 * 64 + 64);
  EXPECT_EQ(CountParameters(*RefineLayer(256)), 2 * 256 * 256 + 256);
}

}  // namespace
}  // namespace irasep
