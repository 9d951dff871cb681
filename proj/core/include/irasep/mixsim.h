// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_MIXSIM_H_
#define IRASEP_MIXSIM_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "irasep/audio.h"
#include "irasep/manifest.h"

namespace irasep {

// Acoustic identity of a synthetic talker.
struct SpeakerProfile {
  std::string speaker_id;
  double f0_base = 120.0;         // Hz, in [70, 300]
  double f0_range = 20.0;         // Hz, excursion around f0_base
  double spectral_tilt = -6.0;    // dB per octave
  std::array<double, 3> formant_centers{500.0, 1500.0, 2500.0};  // Hz
  uint64_t seed = 0;

  bool operator==(const SpeakerProfile&) const = default;
};

void ValidateProfile(const SpeakerProfile& profile);

// Deterministic family of distinct profiles with ids "spk000", "spk001", ...
std::vector<SpeakerProfile> MakeProfiles(int count, uint64_t seed);

struct MixSpec {
  SpeakerProfile target;
  std::vector<SpeakerProfile> interferers;
  double mix_snr_db = 0.0;
  std::optional<double> noise_snr_db;
  double duration_s = 4.0;
};

void ValidateMixSpec(const MixSpec& spec);

// Harmonic voiced excitation along a random f0 contour, shaped by the
// profile's formants and tilt, gated by a syllable/pause envelope. RMS is
// normalized to 0.1. Deterministic in (profile, duration_s, seed).
AudioSegment SynthUtterance(const SpeakerProfile& profile, double duration_s,
                            uint64_t seed);

// Pink noise with a random band emphasis; RMS 0.1.
AudioSegment SynthNoise(double duration_s, uint64_t seed);

struct MixResult {
  AudioSegment mixture;
  AudioSegment scaled_other;
  double gain = 1.0;
};

// Scales `other` so that 10 log10(P_signal / P_scaled_other) == snr_db and
// returns signal + scaled_other.
MixResult MixAtSnr(const AudioSegment& signal, const AudioSegment& other,
                   double snr_db);

// Mean square of the samples.
double Power(const AudioSegment& audio);
double SnrDb(const AudioSegment& signal, const AudioSegment& other);

struct CorpusConfig {
  std::filesystem::path out_dir;
  int n_train = 100;
  int n_valid = 20;
  int n_test = 20;
  double utterance_min_s = 4.0;
  double utterance_max_s = 4.0;
  double reference_s = 4.0;
  double snr_min_db = -5.0;
  double snr_max_db = 5.0;
  bool noise = false;
  double noise_snr_min_db = -3.0;
  double noise_snr_max_db = 6.0;
  // Held-out speakers used only as test targets (open condition).
  bool open_condition = true;
  int test_speakers = 0;  // 0: max(2, profiles / 4)
  // Emit one record per speaker of each mixture.
  bool both_targets = false;
  uint64_t seed = 1;
};

struct CorpusManifests {
  std::filesystem::path train;
  std::filesystem::path valid;
  std::filesystem::path test;
};

// Writes <out_dir>/<split>/{mix,s1,s2,noise,ref,ref2}/<id>.wav and the
// manifests <out_dir>/{train,valid,test}.jsonl. s1 holds the target, s2 the
// scaled interferer, noise the scaled noise track; all are stored at 16-bit
// and mix == s1 + s2 (+ noise) holds sample-exactly on the stored integers.
// mix_snr_db / noise_snr_db record the SNRs measured on the stored files.
CorpusManifests BuildCorpus(const std::vector<SpeakerProfile>& profiles,
                            const CorpusConfig& config);

// Per-example seed derived from (master seed, split, index), so examples can
// be produced in any order.
uint64_t ExampleSeed(uint64_t master_seed, int split, int index);

// Paths of the components stored next to a record's mixture.
struct MixtureComponents {
  std::filesystem::path s1;
  std::filesystem::path s2;
  std::optional<std::filesystem::path> noise;
};
MixtureComponents LocateComponents(const std::filesystem::path& mixture_path);

}  // namespace irasep

#endif  // IRASEP_MIXSIM_H_
