// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/audio.h"

#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "irasep/error.h"
#include "test_util.h"

namespace irasep {
namespace {

// Hand-rolled WAV writer so the reader is exercised against headers it did
// not produce itself.
void WriteRawWav(const std::filesystem::path& path, uint16_t channels, uint32_t rate,
                 uint16_t bits, const std::vector<int16_t>& samples) {
  auto le32 = [](std::ofstream& o, uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); };
  auto le16 = [](std::ofstream& o, uint16_t v) { o.write(reinterpret_cast<const char*>(&v), 2); };
  std::ofstream o(path, std::ios::binary);
  const uint32_t bytes = static_cast<uint32_t>(samples.size() * 2);
  o.write("RIFF", 4);
  le32(o, 36 + bytes + 12);
  o.write("WAVE", 4);
  o.write("LIST", 4);  // unrelated chunk before fmt
  le32(o, 4);
  o.write("INFO", 4);
  o.write("fmt ", 4);
  le32(o, 16);
  le16(o, 1);
  le16(o, channels);
  le32(o, rate);
  le32(o, rate * channels * bits / 8);
  le16(o, static_cast<uint16_t>(channels * bits / 8));
  le16(o, bits);
  o.write("data", 4);
  le32(o, bytes);
  o.write(reinterpret_cast<const char*>(samples.data()), bytes);
}

TEST(AudioTest, OneSecondFileHas8000Samples) {
  TempDir dir;
  WriteRawWav(dir.path() / "a.wav", 1, 8000, 16, std::vector<int16_t>(8000, 100));
  const AudioSegment a = LoadAudio(dir.path() / "a.wav");
  EXPECT_EQ(a.size(), 8000u);
  EXPECT_EQ(a.sample_rate, 8000);
  EXPECT_DOUBLE_EQ(a.duration(), 1.0);
}

TEST(AudioTest, FullScaleSampleScaling) {
  TempDir dir;
  WriteRawWav(dir.path() / "a.wav", 1, 8000, 16, {32767, -32768, 0, 1});
  const AudioSegment a = LoadAudio(dir.path() / "a.wav");
  EXPECT_DOUBLE_EQ(a.samples[0], 32767.0 / 32768.0);
  EXPECT_NEAR(a.samples[0], 0.99997, 1e-5);
  EXPECT_DOUBLE_EQ(a.samples[1], -1.0);
  EXPECT_DOUBLE_EQ(a.samples[2], 0.0);
  EXPECT_DOUBLE_EQ(a.samples[3], 1.0 / 32768.0);
}

TEST(AudioTest, RejectsOtherSampleRates) {
  TempDir dir;
  WriteRawWav(dir.path() / "a.wav", 1, 16000, 16, std::vector<int16_t>(16, 0));
  try {
    LoadAudio(dir.path() / "a.wav");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported sample rate"), std::string::npos);
  }
}

TEST(AudioTest, RejectsMultiChannelAndMissingFiles) {
  TempDir dir;
  WriteRawWav(dir.path() / "st.wav", 2, 8000, 16, std::vector<int16_t>(16, 0));
  EXPECT_THROW(LoadAudio(dir.path() / "st.wav"), Error);
  EXPECT_THROW(LoadAudio(dir.path() / "missing.wav"), Error);
}

TEST(AudioTest, WriteReadRoundTripOnTheQuantizationGrid) {
  TempDir dir;
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> dist(-32768, 32767);
  AudioSegment a;
  for (int i = 0; i < 1000; ++i) a.samples.push_back(DequantizeSample(static_cast<int16_t>(dist(rng))));
  WriteAudio(dir.path() / "x.wav", a);
  EXPECT_EQ(LoadAudio(dir.path() / "x.wav"), a);
}

TEST(AudioTest, WriteRejectsNonFiniteAndWrongRate) {
  TempDir dir;
  AudioSegment a;
  a.samples = {0.0, std::nan("")};
  EXPECT_THROW(WriteAudio(dir.path() / "x.wav", a), Error);
  a.samples = {0.0};
  a.sample_rate = 16000;
  EXPECT_THROW(WriteAudio(dir.path() / "x.wav", a), Error);
}

AudioSegment Ramp(std::size_t n) {
  AudioSegment a;
  for (std::size_t i = 0; i < n; ++i) a.samples.push_back(static_cast<double>(i + 1) / (n + 1));
  return a;
}

TEST(SegmentFixedTest, TenSecondsIntoFourSecondWindows) {
  const auto segs = SegmentFixed(Ramp(80000), 4.0);
  ASSERT_EQ(segs.size(), 3u);  // ceil(10 / 4)
  for (const auto& s : segs) EXPECT_EQ(s.size(), 32000u);
  // the last 2 s are padding
  for (std::size_t i = 16000; i < 32000; ++i) ASSERT_EQ(segs[2].samples[i], 0.0);
  EXPECT_NE(segs[2].samples[15999], 0.0);
}

TEST(SegmentFixedTest, ExactWindowIsIdentity) {
  const AudioSegment a = Ramp(32000);
  const auto segs = SegmentFixed(a, 4.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0], a);
}

TEST(SegmentFixedTest, ShortInputIsPadded) {
  const auto segs = SegmentFixed(Ramp(24000), 4.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].size(), 32000u);
  EXPECT_EQ(std::count(segs[0].samples.begin(), segs[0].samples.end(), 0.0), 8000);
}

TEST(SegmentFixedTest, Errors) {
  EXPECT_THROW(SegmentFixed(AudioSegment{}, 4.0), Error);
  EXPECT_THROW(SegmentFixed(Ramp(10), 0.0), Error);
  EXPECT_THROW(SegmentFixed(Ramp(10), -1.0), Error);
}

TEST(SegmentFixedTest, CountAndConcatenationProperty) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> len(1, 50000);
  std::uniform_real_distribution<double> secs(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const AudioSegment a = Ramp(len(rng));
    const double s = secs(rng);
    const std::size_t window = WindowSamples(s);
    const auto segs = SegmentFixed(a, s);
    ASSERT_EQ(segs.size(), (a.size() + window - 1) / window);
    std::vector<double> joined;
    for (const auto& seg : segs) joined.insert(joined.end(), seg.samples.begin(), seg.samples.end());
    joined.resize(a.size());
    ASSERT_EQ(joined, a.samples);
  }
}

}  // namespace
}  // namespace irasep
