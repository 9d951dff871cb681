// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_AUDIO_H_
#define IRASEP_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace irasep {

inline constexpr int kSampleRate = 8000;

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioSegment {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioSegment&) const = default;
};

// Reads a single-channel 16-bit linear PCM WAV file at 8 kHz. Integer samples
// are mapped to v / 32768. Throws irasep::Error on a missing file, a
// non-PCM or multi-channel file, or any rate other than 8000 Hz.
AudioSegment LoadAudio(const std::filesystem::path& path);

// Writes a 16-bit PCM WAV. Samples are rounded to the nearest multiple of
// 1/32768 and clipped to the int16 range.
void WriteAudio(const std::filesystem::path& path, const AudioSegment& audio);

// Quantization used by WriteAudio, exposed so that callers can build signals
// that survive a write/read cycle unchanged.
int16_t QuantizeSample(double value);
double DequantizeSample(int16_t value);

// Throws unless sample_rate == 8000 and every sample is finite.
void CheckAudio(const AudioSegment& audio);

// Splits into non-overlapping windows of seconds * 8000 samples. The final
// partial window is zero-padded to full length, so the result has
// ceil(T / window) entries.
std::vector<AudioSegment> SegmentFixed(const AudioSegment& audio,
                                       double seconds);

// Sample count of one window as used by SegmentFixed.
std::size_t WindowSamples(double seconds, int sample_rate = kSampleRate);

}  // namespace irasep

#endif  // IRASEP_AUDIO_H_
