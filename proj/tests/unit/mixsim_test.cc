// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/mixsim.h"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "irasep/error.h"
#include "test_util.h"

namespace irasep {
namespace {

// max over all lags of |sum a[i] b[i+lag]| / (|a| |b|), brute force.
double PeakNormalizedXcorr(const std::vector<double>& a, const std::vector<double>& b) {
  double ea = 0, eb = 0;
  for (double v : a) ea += v * v;
  for (double v : b) eb += v * v;
  const auto n = static_cast<long>(a.size());
  double peak = 0.0;
  for (long lag = -(n - 1); lag < n; ++lag) {
    double s = 0.0;
    for (long i = std::max(0L, -lag); i < std::min(n, n - lag); ++i) s += a[i] * b[i + lag];
    peak = std::max(peak, std::abs(s));
  }
  return peak / std::sqrt(ea * eb);
}

std::string FileBytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(SynthTest, DeterministicAndSized) {
  const auto profiles = MakeProfiles(3, 7);
  const AudioSegment a = SynthUtterance(profiles[0], 2.0, 42);
  const AudioSegment b = SynthUtterance(profiles[0], 2.0, 42);
  EXPECT_EQ(a.size(), 16000u);
  EXPECT_EQ(a, b);
  double energy = 0;
  for (double v : a.samples) energy += v * v;
  EXPECT_NEAR(std::sqrt(energy / a.size()), 0.1, 1e-12);
}

TEST(SynthTest, DifferentSeedsAreDifferentUtterances) {
  const auto profiles = MakeProfiles(4, 9);
  for (const auto& p : profiles) {
    const AudioSegment a = SynthUtterance(p, 1.0, 1);
    const AudioSegment b = SynthUtterance(p, 1.0, 2);
    EXPECT_LT(PeakNormalizedXcorr(a.samples, b.samples), 0.9) << p.speaker_id;
  }
}

TEST(SynthTest, RejectsBadInputs) {
  auto p = MakeProfiles(1, 1)[0];
  EXPECT_THROW(SynthUtterance(p, 0.0, 1), Error);
  p.formant_centers = {500, 400, 2500};
  EXPECT_THROW(SynthUtterance(p, 1.0, 1), Error);
  p = MakeProfiles(1, 1)[0];
  p.f0_base = 400;
  EXPECT_THROW(ValidateProfile(p), Error);
  p = MakeProfiles(1, 1)[0];
  p.formant_centers[2] = 4100;
  EXPECT_THROW(ValidateProfile(p), Error);
}

TEST(ProfilesTest, DistinctAndValid) {
  const auto profiles = MakeProfiles(40, 3);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    ValidateProfile(profiles[i]);
    ids.insert(profiles[i].speaker_id);
    for (std::size_t j = 0; j < i; ++j) {
      auto a = profiles[i], b = profiles[j];
      a.speaker_id = b.speaker_id;
      a.seed = b.seed;
      EXPECT_NE(a, b);
    }
  }
  EXPECT_EQ(ids.size(), profiles.size());
  EXPECT_EQ(MakeProfiles(5, 3)[4], profiles[4]);
}

TEST(MixAtSnrTest, EqualPowerZeroDbHasUnitGain) {
  AudioSegment a, b;
  a.samples = {1, -1, 1, -1};
  b.samples = {-1, -1, 1, 1};
  const MixResult r = MixAtSnr(a, b, 0.0);
  EXPECT_DOUBLE_EQ(r.gain, 1.0);
  EXPECT_EQ(r.scaled_other, b);
  EXPECT_EQ(r.mixture.samples, (std::vector<double>{0, -2, 2, 0}));
}

TEST(MixAtSnrTest, RemeasuredSnrMatchesRequest) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> snr(-20.0, 20.0);
  std::uniform_real_distribution<double> scale(1e-3, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    AudioSegment a, b;
    const double sa = scale(rng), sb = scale(rng);
    for (int i = 0; i < 257; ++i) {
      a.samples.push_back(sa * normal(rng));
      b.samples.push_back(sb * normal(rng));
    }
    const double want = snr(rng);
    const MixResult r = MixAtSnr(a, b, want);
    ASSERT_NEAR(SnrDb(a, r.scaled_other), want, 1e-6);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(r.mixture.samples[i], a.samples[i] + r.scaled_other.samples[i]);
    }
  }
}

TEST(MixAtSnrTest, Errors) {
  AudioSegment a, z, short_one;
  a.samples = {1, 2, 3};
  z.samples = {0, 0, 0};
  short_one.samples = {1, 2};
  try {
    MixAtSnr(a, z, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zero-energy"), std::string::npos);
  }
  EXPECT_THROW(MixAtSnr(z, a, 0.0), Error);
  EXPECT_THROW(MixAtSnr(a, short_one, 0.0), Error);
}

CorpusConfig SmallConfig(const std::filesystem::path& dir) {
  CorpusConfig c;
  c.out_dir = dir;
  c.n_train = 3;
  c.n_valid = 2;
  c.n_test = 2;
  c.utterance_min_s = 0.5;
  c.utterance_max_s = 0.8;
  c.reference_s = 0.5;
  c.seed = 99;
  return c;
}

TEST(CorpusTest, TwoProfilesClosedCondition) {
  TempDir dir;
  CorpusConfig c = SmallConfig(dir.path());
  c.open_condition = false;
  c.n_test = 1;
  const auto m = BuildCorpus(MakeProfiles(2, 1), c);
  const auto test = ReadManifest(m.test);
  ASSERT_EQ(test.size(), 1u);
  EXPECT_NE(test[0].target_speaker_id, test[0].interference_speaker_ids.at(0));
}

TEST(CorpusTest, OpenConditionHoldsOutTestSpeakers) {
  TempDir dir;
  CorpusConfig c = SmallConfig(dir.path());
  c.n_train = 12;
  c.n_test = 6;
  const auto m = BuildCorpus(MakeProfiles(8, 4), c);
  std::set<std::string> train_ids, test_ids;
  for (const auto& r : ReadManifest(m.train)) train_ids.insert(r.target_speaker_id);
  for (const auto& r : ReadManifest(m.valid)) train_ids.insert(r.target_speaker_id);
  for (const auto& r : ReadManifest(m.test)) test_ids.insert(r.target_speaker_id);
  for (const auto& id : test_ids) EXPECT_EQ(train_ids.count(id), 0u) << id;
  EXPECT_FALSE(test_ids.empty());
}

TEST(CorpusTest, RecordsAreExactMixtures) {
  TempDir dir;
  CorpusConfig c = SmallConfig(dir.path());
  c.noise = true;
  c.both_targets = true;
  const auto m = BuildCorpus(MakeProfiles(6, 2), c);
  for (const auto& manifest : {m.train, m.valid, m.test}) {
    const auto records = ReadManifest(manifest);
    ASSERT_EQ(records.size() % 2, 0u);
    for (const auto& r : records) {
      EXPECT_NE(r.reference_path, r.target_path);
      const auto mix_path = ResolveManifestPath(manifest, r.mixture_path);
      const AudioSegment mix = LoadAudio(mix_path);
      const auto parts = LocateComponents(mix_path);
      const AudioSegment s1 = LoadAudio(parts.s1);
      const AudioSegment s2 = LoadAudio(parts.s2);
      ASSERT_TRUE(parts.noise.has_value());
      const AudioSegment noise = LoadAudio(*parts.noise);
      for (std::size_t i = 0; i < mix.size(); ++i) {
        ASSERT_EQ(mix.samples[i], s1.samples[i] + s2.samples[i] + noise.samples[i]);
      }
      const AudioSegment target = LoadAudio(ResolveManifestPath(manifest, r.target_path));
      const AudioSegment& other = (target == s1) ? s2 : s1;
      EXPECT_NEAR(SnrDb(target, other), r.mix_snr_db, 1e-6);
      AudioSegment speech = s1;
      for (std::size_t i = 0; i < speech.size(); ++i) speech.samples[i] += s2.samples[i];
      ASSERT_TRUE(r.noise_snr_db.has_value());
      EXPECT_NEAR(SnrDb(speech, noise), *r.noise_snr_db, 1e-6);
      EXPECT_LE(r.mix_snr_db, 5.0 + 0.01);
      EXPECT_GE(r.mix_snr_db, -5.0 - 0.01);
    }
  }
}

TEST(CorpusTest, ByteIdenticalForSameSeed) {
  TempDir a, b;
  const auto profiles = MakeProfiles(5, 8);
  BuildCorpus(profiles, SmallConfig(a.path()));
  BuildCorpus(profiles, SmallConfig(b.path()));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    ASSERT_EQ(FileBytes(entry.path()), FileBytes(b.path() / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 10u);
}

TEST(CorpusTest, Errors) {
  TempDir dir;
  CorpusConfig c = SmallConfig(dir.path());
  EXPECT_THROW(BuildCorpus(MakeProfiles(1, 1), c), Error);
  c.n_valid = 0;
  EXPECT_THROW(BuildCorpus(MakeProfiles(6, 1), c), Error);
  c = SmallConfig(dir.path());
  c.open_condition = true;
  EXPECT_THROW(BuildCorpus(MakeProfiles(3, 1), c), Error);
}

TEST(CorpusTest, ExampleSeedsAreDistinct) {
  std::set<uint64_t> seeds;
  for (int split = 0; split < 3; ++split) {
    for (int i = 0; i < 1000; ++i) seeds.insert(ExampleSeed(1, split, i));
  }
  EXPECT_EQ(seeds.size(), 3000u);
}

}  // namespace
}  // namespace irasep
