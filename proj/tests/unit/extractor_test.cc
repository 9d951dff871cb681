// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/extractor.h"

#include <type_traits>

#include <gtest/gtest.h>

#include "irasep/error.h"

namespace irasep {
namespace {

// The embedding enters only before the first block: a block cannot take it.
static_assert(!std::is_invocable_v<decltype(&DprnnBlockImpl::forward), DprnnBlockImpl&,
                                   const torch::Tensor&, const torch::Tensor&>);
static_assert(std::is_invocable_v<decltype(&DprnnBlockImpl::forward), DprnnBlockImpl&,
                                  const torch::Tensor&>);

ExtractorConfig SmallExtractor() {
  ExtractorConfig cfg;
  cfg.dprnn_blocks = 2;
  cfg.rnn_hidden = 8;
  cfg.chunk_size = 6;
  cfg.feature_dim = 10;
  return cfg;
}

TEST(ChunkTest, Counts) {
  EXPECT_EQ(NumChunks(10, 4), 5);
  EXPECT_EQ(ChunkSegment(torch::rand({1, 3, 10}), 4).sizes(), (std::vector<int64_t>{1, 3, 4, 5}));
  EXPECT_EQ(NumChunks(4, 4), 2);
  EXPECT_EQ(ChunkSegment(torch::rand({2, 3, 4}), 4).size(3), 2);
  // S beyond K still gives a padded layout
  EXPECT_EQ(NumChunks(3, 8), 1);
  EXPECT_THROW(ChunkSegment(torch::rand({1, 3, 10}), 5), Error);
  EXPECT_THROW(ChunkSegment(torch::rand({1, 3, 10}), 0), Error);
}

TEST(ChunkTest, ChunkContents) {
  const auto x = torch::arange(1, 11, torch::kDouble).view({1, 1, 10});
  const auto c = ChunkSegment(x, 4);  // hop 2, padded to 12
  for (int64_t p = 0; p < 5; ++p) {
    for (int64_t s = 0; s < 4; ++s) {
      const int64_t idx = p * 2 + s;
      const double expect = idx < 10 ? idx + 1.0 : 0.0;
      ASSERT_EQ(c[0][0][s][p].item<double>(), expect);
    }
  }
}

TEST(ChunkTest, RoundTripSweep) {
  torch::manual_seed(9);
  for (int64_t k = 1; k <= 40; ++k) {
    for (int64_t s = 2; s <= 24; s += 2) {
      const auto x = torch::randn({2, 3, k}, torch::kDouble);
      const auto back = OverlapAddChunks(ChunkSegment(x, s), k);
      ASSERT_TRUE(torch::equal(back, x)) << "K=" << k << " S=" << s;
    }
  }
}

TEST(ChunkTest, DefaultChunkSize) {
  EXPECT_EQ(DefaultChunkSize(3999), 90);  // sqrt(7998) = 89.4
  EXPECT_EQ(DefaultChunkSize(999), 44);   // sqrt(1998) = 44.7
  EXPECT_EQ(DefaultChunkSize(1), 2);
}

TEST(ExtractorTest, MaskShapeAndSign) {
  Extractor ext(64, 128, ExtractorConfig{1, 16, 90, 64});
  ext->eval();
  torch::NoGradGuard ng;
  const auto mask = ext->EstimateMask(torch::randn({1, 128}), torch::rand({1, 64, 3999}));
  EXPECT_EQ(mask.sizes(), (std::vector<int64_t>{1, 64, 3999}));
  EXPECT_GE(mask.min().item<float>(), 0.0f);
}

TEST(ExtractorTest, RandomInputsGiveNonNegativeMasks) {
  torch::manual_seed(10);
  Extractor ext(12, 5, SmallExtractor());
  torch::NoGradGuard ng;
  for (int trial = 0; trial < 20; ++trial) {
    const auto mask = ext->EstimateMask(torch::randn({2, 5}) * 3, torch::rand({2, 12, 17 + trial}));
    ASSERT_EQ(mask.sizes(), (std::vector<int64_t>{2, 12, 17 + trial}));
    ASSERT_GE(mask.min().item<float>(), 0.0f);
  }
}

TEST(ExtractorTest, EmbeddingChangesMask) {
  torch::manual_seed(11);
  Extractor ext(12, 5, SmallExtractor());
  ext->eval();
  torch::NoGradGuard ng;
  const auto mix = torch::rand({1, 12, 30});
  const auto a = ext->EstimateMask(torch::randn({1, 5}), mix);
  const auto b = ext->EstimateMask(torch::randn({1, 5}), mix);
  EXPECT_GT((a - b).norm().item<float>(), 0.0f);
}

TEST(ExtractorTest, DimensionMismatch) {
  Extractor ext(12, 5, SmallExtractor());
  EXPECT_THROW(ext->EstimateMask(torch::randn({1, 4}), torch::rand({1, 12, 30})), Error);
  EXPECT_THROW(ext->EstimateMask(torch::randn({1, 5}), torch::rand({1, 11, 30})), Error);
  EXPECT_THROW(ext->EstimateMask(torch::randn({2, 5}), torch::rand({1, 12, 30})), Error);
  EXPECT_EQ(ext->num_blocks(), 2);
}

TEST(ApplyMaskTest, ElementWise) {
  torch::manual_seed(12);
  const auto mix = torch::rand({1, 6, 9}, torch::kDouble);
  EXPECT_TRUE(torch::equal(ApplyMask(mix, torch::ones_like(mix)), mix));
  EXPECT_TRUE(torch::equal(ApplyMask(mix, torch::zeros_like(mix)), torch::zeros_like(mix)));
  const auto m = torch::rand({1, 6, 9}, torch::kDouble);
  const auto d = ApplyMask(mix, m);
  for (int64_t i = 0; i < 6; ++i) {
    for (int64_t k = 0; k < 9; k += 4) {
      EXPECT_EQ(d[0][i][k].item<double>(), mix[0][i][k].item<double>() * m[0][i][k].item<double>());
    }
  }
  EXPECT_THROW(ApplyMask(mix, torch::rand({1, 6, 8}, torch::kDouble)), Error);
}

}  // namespace
}  // namespace irasep
