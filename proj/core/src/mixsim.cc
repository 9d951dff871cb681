// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/mixsim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "irasep/error.h"

namespace irasep {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Platform-independent draws on top of mt19937_64 (the std distributions
// are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double Normal() {
    const double u1 = 1.0 - Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr double kUtteranceRms = 0.1;
constexpr double kPeakLimit = 0.9;

void NormalizeRms(std::vector<double>* x, double rms) {
  double energy = 0.0;
  for (double v : *x) energy += v * v;
  if (energy == 0.0) return;
  const double g = rms / std::sqrt(energy / static_cast<double>(x->size()));
  for (double& v : *x) v *= g;
}

std::size_t SamplesFor(double duration_s) {
  if (!(duration_s > 0)) throw Error("invalid_argument", "duration must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration_s * kSampleRate)));
}

struct Syllable {
  std::size_t start = 0;
  std::size_t length = 0;
  double f0_begin = 0.0;
  double f0_end = 0.0;
  std::array<double, 3> formant_scale{1.0, 1.0, 1.0};
  double amplitude = 1.0;
};

double HarmonicGain(double freq, const SpeakerProfile& p,
                    const std::array<double, 3>& formant_scale) {
  static constexpr double kFormantWeight[3] = {1.0, 0.7, 0.45};
  double g = 0.02;
  for (int i = 0; i < 3; ++i) {
    const double center = p.formant_centers[i] * formant_scale[i];
    const double bw = 60.0 + 0.08 * center;
    const double d = (freq - center) / bw;
    g += kFormantWeight[i] * std::exp(-0.5 * d * d);
  }
  const double tilt = std::pow(10.0, p.spectral_tilt * std::log2(freq / 100.0) / 20.0);
  return g * tilt;
}

AudioSegment ToSegment(std::vector<double> samples) {
  AudioSegment a;
  a.samples = std::move(samples);
  return a;
}

std::vector<double> Quantized(const std::vector<double>& x, double gain) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = DequantizeSample(QuantizeSample(x[i] * gain));
  return out;
}

std::string ExampleId(const char* split, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05d", split, index);
  return buf;
}

}  // namespace

void ValidateProfile(const SpeakerProfile& p) {
  if (p.speaker_id.empty()) throw Error("invalid_argument", "empty speaker id");
  if (!(p.f0_base >= 70.0 && p.f0_base <= 300.0)) {
    throw Error("invalid_argument", "f0_base outside [70, 300] Hz for " + p.speaker_id);
  }
  if (!(p.f0_range >= 0.0) || p.f0_base - p.f0_range <= 0.0) {
    throw Error("invalid_argument", "bad f0_range for " + p.speaker_id);
  }
  const auto& f = p.formant_centers;
  if (!(f[0] > 0.0 && f[0] < f[1] && f[1] < f[2] && f[2] < kSampleRate / 2.0)) {
    throw Error("invalid_argument",
                "formants must be increasing and below 4000 Hz for " + p.speaker_id);
  }
}

std::vector<SpeakerProfile> MakeProfiles(int count, uint64_t seed) {
  if (count < 1) throw Error("invalid_argument", "profile count must be positive");
  std::vector<SpeakerProfile> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(SplitMix64(seed * 1000003ULL + static_cast<uint64_t>(i)));
    SpeakerProfile p;
    char id[32];
    std::snprintf(id, sizeof(id), "spk%03d", i);
    p.speaker_id = id;
    const bool low = (i % 2) == 0;
    p.f0_base = low ? rng.Uniform(85.0, 155.0) : rng.Uniform(165.0, 260.0);
    p.f0_range = rng.Uniform(0.08, 0.2) * p.f0_base;
    p.spectral_tilt = rng.Uniform(-12.0, -4.0);
    p.formant_centers = {rng.Uniform(350.0, 800.0), rng.Uniform(1000.0, 2200.0),
                         rng.Uniform(2400.0, 3400.0)};
    p.seed = rng.Next();
    ValidateProfile(p);
    out.push_back(std::move(p));
  }
  return out;
}

void ValidateMixSpec(const MixSpec& spec) {
  ValidateProfile(spec.target);
  if (spec.interferers.empty()) throw Error("invalid_argument", "need at least one interferer");
  for (const auto& p : spec.interferers) {
    ValidateProfile(p);
    if (p.speaker_id == spec.target.speaker_id) {
      throw Error("invalid_argument", "interferer equals target " + p.speaker_id);
    }
  }
  if (!(spec.duration_s > 0)) throw Error("invalid_argument", "duration must be positive");
}

AudioSegment SynthUtterance(const SpeakerProfile& profile, double duration_s,
                            uint64_t seed) {
  ValidateProfile(profile);
  const std::size_t n = SamplesFor(duration_s);
  Rng rng(SplitMix64(profile.seed ^ SplitMix64(seed)));

  const double f0_lo = profile.f0_base - profile.f0_range;
  const double f0_hi = profile.f0_base + profile.f0_range;
  std::vector<Syllable> syllables;
  double t = rng.Uniform(0.0, 0.12);
  double f0 = rng.Uniform(f0_lo, f0_hi);
  while (t < duration_s) {
    Syllable s;
    s.start = static_cast<std::size_t>(t * kSampleRate);
    const double len = rng.Uniform(0.12, 0.35);
    s.length = static_cast<std::size_t>(len * kSampleRate);
    s.f0_begin = f0;
    f0 = std::clamp(f0 + rng.Uniform(-0.6, 0.6) * profile.f0_range, f0_lo, f0_hi);
    s.f0_end = f0;
    for (double& v : s.formant_scale) v = rng.Uniform(0.85, 1.15);
    s.amplitude = rng.Uniform(0.5, 1.0);
    syllables.push_back(s);
    double pause = rng.Uniform(0.03, 0.15);
    if (rng.Uniform() < 0.2) pause += rng.Uniform(0.1, 0.3);
    t += len + pause;
  }

  std::vector<double> out(n, 0.0);
  constexpr std::size_t kBlock = 80;
  const double two_pi = 2.0 * std::numbers::pi;
  for (const Syllable& s : syllables) {
    if (s.start >= n) break;
    const std::size_t end = std::min(n, s.start + s.length);
    const auto attack = static_cast<std::size_t>(0.02 * kSampleRate);
    const auto release = static_cast<std::size_t>(0.03 * kSampleRate);
    const double vibrato_rate = rng.Uniform(4.0, 6.0);
    const double vibrato_depth = rng.Uniform(0.005, 0.015);
    std::vector<double> phase_offset(64);
    for (double& p : phase_offset) p = rng.Uniform(0.0, two_pi);
    double phase = 0.0;
    std::vector<double> gains;
    for (std::size_t i = s.start; i < end; ++i) {
      const std::size_t local = i - s.start;
      const double frac = static_cast<double>(local) / static_cast<double>(s.length);
      double f = s.f0_begin + (s.f0_end - s.f0_begin) * frac;
      f *= 1.0 + vibrato_depth * std::sin(two_pi * vibrato_rate * local / kSampleRate);
      phase += two_pi * f / kSampleRate;
      if (local % kBlock == 0) {
        gains.clear();
        for (int k = 1; k <= 64 && k * f < 3800.0; ++k) {
          gains.push_back(HarmonicGain(k * f, profile, s.formant_scale));
        }
      }
      double env = 1.0;
      if (local < attack) env = 0.5 - 0.5 * std::cos(std::numbers::pi * local / attack);
      const std::size_t remaining = s.length - local;
      if (remaining < release) {
        env *= 0.5 - 0.5 * std::cos(std::numbers::pi * remaining / release);
      }
      double v = 0.0;
      for (std::size_t k = 0; k < gains.size(); ++k) {
        v += gains[k] * std::sin(static_cast<double>(k + 1) * phase + phase_offset[k]);
      }
      v += 0.03 * rng.Normal();
      out[i] += s.amplitude * env * v;
    }
  }
  NormalizeRms(&out, kUtteranceRms);
  return ToSegment(std::move(out));
}

AudioSegment SynthNoise(double duration_s, uint64_t seed) {
  const std::size_t n = SamplesFor(duration_s);
  Rng rng(SplitMix64(seed ^ 0x6e6f697365ULL));
  // Pink noise (Kellet's economy filter) followed by a peaking biquad.
  double b0 = 0, b1 = 0, b2 = 0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double white = rng.Normal();
    b0 = 0.99765 * b0 + white * 0.0990460;
    b1 = 0.96300 * b1 + white * 0.2965164;
    b2 = 0.57000 * b2 + white * 1.0526913;
    x[i] = b0 + b1 + b2 + white * 0.1848;
  }
  const double fc = rng.Uniform(200.0, 3000.0);
  const double gain_db = rng.Uniform(3.0, 12.0);
  const double q = rng.Uniform(0.7, 2.0);
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * fc / kSampleRate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c0 = 1 + alpha * a, c1 = -2 * std::cos(w0), c2 = 1 - alpha * a;
  const double d0 = 1 + alpha / a, d1 = -2 * std::cos(w0), d2 = 1 - alpha / a;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : x) {
    const double y = (c0 * v + c1 * x1 + c2 * x2 - d1 * y1 - d2 * y2) / d0;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
  NormalizeRms(&x, kUtteranceRms);
  return ToSegment(std::move(x));
}

double Power(const AudioSegment& audio) {
  if (audio.samples.empty()) return 0.0;
  double e = 0.0;
  for (double v : audio.samples) e += v * v;
  return e / static_cast<double>(audio.samples.size());
}

double SnrDb(const AudioSegment& signal, const AudioSegment& other) {
  const double ps = Power(signal);
  const double po = Power(other);
  if (ps == 0.0 || po == 0.0) throw Error("invalid_argument", "zero-energy signal");
  return 10.0 * std::log10(ps / po);
}

MixResult MixAtSnr(const AudioSegment& signal, const AudioSegment& other,
                   double snr_db) {
  if (signal.size() != other.size()) {
    throw Error("invalid_argument", "length mismatch in mix");
  }
  if (signal.sample_rate != other.sample_rate) {
    throw Error("invalid_argument", "sample rate mismatch in mix");
  }
  const double ps = Power(signal);
  const double po = Power(other);
  if (ps == 0.0 || po == 0.0) throw Error("invalid_argument", "zero-energy input to mix");
  MixResult r;
  r.gain = std::sqrt(ps / (po * std::pow(10.0, snr_db / 10.0)));
  r.scaled_other.sample_rate = other.sample_rate;
  r.scaled_other.samples.resize(other.size());
  r.mixture.sample_rate = signal.sample_rate;
  r.mixture.samples.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    r.scaled_other.samples[i] = r.gain * other.samples[i];
    r.mixture.samples[i] = signal.samples[i] + r.scaled_other.samples[i];
  }
  return r;
}

uint64_t ExampleSeed(uint64_t master_seed, int split, int index) {
  return SplitMix64(SplitMix64(master_seed) ^
                    SplitMix64((static_cast<uint64_t>(split) << 32) |
                               static_cast<uint32_t>(index)));
}

MixtureComponents LocateComponents(const std::filesystem::path& mixture_path) {
  const auto split_dir = mixture_path.parent_path().parent_path();
  const auto name = mixture_path.filename();
  MixtureComponents c;
  c.s1 = split_dir / "s1" / name;
  c.s2 = split_dir / "s2" / name;
  const auto noise = split_dir / "noise" / name;
  if (std::filesystem::exists(noise)) c.noise = noise;
  return c;
}

CorpusManifests BuildCorpus(const std::vector<SpeakerProfile>& profiles,
                            const CorpusConfig& cfg) {
  if (profiles.size() < 2) throw Error("invalid_argument", "need at least 2 speaker profiles");
  for (const auto& p : profiles) ValidateProfile(p);
  if (cfg.n_train < 1 || cfg.n_valid < 1 || cfg.n_test < 1) {
    throw Error("invalid_argument", "every split needs at least one example");
  }
  if (!(cfg.utterance_min_s > 0) || cfg.utterance_max_s < cfg.utterance_min_s ||
      !(cfg.reference_s > 0)) {
    throw Error("invalid_argument", "bad utterance/reference duration");
  }
  if (cfg.snr_max_db < cfg.snr_min_db || cfg.noise_snr_max_db < cfg.noise_snr_min_db) {
    throw Error("invalid_argument", "empty SNR range");
  }

  std::vector<const SpeakerProfile*> train_pool, test_pool;
  if (cfg.open_condition) {
    const int n = static_cast<int>(profiles.size());
    const int held = cfg.test_speakers > 0 ? cfg.test_speakers : std::max(2, n / 4);
    if (n - held < 2 || held < 1) {
      throw Error("invalid_argument",
                  "open condition needs at least 2 training speakers and 1 held-out speaker");
    }
    for (int i = 0; i < n; ++i) {
      (i < n - held ? train_pool : test_pool).push_back(&profiles[static_cast<std::size_t>(i)]);
    }
  } else {
    for (const auto& p : profiles) train_pool.push_back(&p);
    test_pool = train_pool;
  }

  struct Split {
    const char* name;
    int count;
    const std::vector<const SpeakerProfile*>* pool;
  };
  const Split splits[3] = {{"train", cfg.n_train, &train_pool},
                           {"valid", cfg.n_valid, &train_pool},
                           {"test", cfg.n_test, &test_pool}};

  CorpusManifests manifests;
  manifests.train = cfg.out_dir / "train.jsonl";
  manifests.valid = cfg.out_dir / "valid.jsonl";
  manifests.test = cfg.out_dir / "test.jsonl";
  const std::filesystem::path* manifest_paths[3] = {&manifests.train, &manifests.valid,
                                                    &manifests.test};

  for (int s = 0; s < 3; ++s) {
    const Split& split = splits[s];
    std::vector<ExampleRecord> records;
    for (int i = 0; i < split.count; ++i) {
      Rng rng(ExampleSeed(cfg.seed, s, i));
      const auto& pool = *split.pool;
      const SpeakerProfile& target = *pool[rng.Index(pool.size())];
      std::vector<const SpeakerProfile*> others;
      for (const auto* p : pool) {
        if (p->speaker_id != target.speaker_id) others.push_back(p);
      }
      if (others.empty()) {
        for (const auto& p : profiles) {
          if (p.speaker_id != target.speaker_id) others.push_back(&p);
        }
      }
      const SpeakerProfile& interferer = *others[rng.Index(others.size())];
      const double duration = rng.Uniform(cfg.utterance_min_s, cfg.utterance_max_s);
      const uint64_t target_seed = rng.Next();
      uint64_t ref_seed = rng.Next();
      if (ref_seed == target_seed) ++ref_seed;
      const uint64_t interf_seed = rng.Next();
      uint64_t interf_ref_seed = rng.Next();
      if (interf_ref_seed == interf_seed) ++interf_ref_seed;
      const uint64_t noise_seed = rng.Next();
      const double snr = rng.Uniform(cfg.snr_min_db, cfg.snr_max_db);
      const double noise_snr = rng.Uniform(cfg.noise_snr_min_db, cfg.noise_snr_max_db);

      const AudioSegment t = SynthUtterance(target, duration, target_seed);
      const AudioSegment v = SynthUtterance(interferer, duration, interf_seed);
      MixResult speech = MixAtSnr(t, v, snr);
      AudioSegment noise;
      std::vector<double> total = speech.mixture.samples;
      if (cfg.noise) {
        MixResult noisy = MixAtSnr(speech.mixture, SynthNoise(duration, noise_seed), noise_snr);
        noise = std::move(noisy.scaled_other);
        total = std::move(noisy.mixture.samples);
      }
      double peak = 0.0;
      for (double x : total) peak = std::max(peak, std::abs(x));
      for (double x : t.samples) peak = std::max(peak, std::abs(x));
      for (double x : speech.scaled_other.samples) peak = std::max(peak, std::abs(x));
      for (double x : noise.samples) peak = std::max(peak, std::abs(x));
      const double gain = peak > kPeakLimit ? kPeakLimit / peak : 1.0;

      const AudioSegment qt = ToSegment(Quantized(t.samples, gain));
      const AudioSegment qv = ToSegment(Quantized(speech.scaled_other.samples, gain));
      AudioSegment qn;
      AudioSegment mix = qt;
      for (std::size_t k = 0; k < mix.size(); ++k) mix.samples[k] += qv.samples[k];
      const AudioSegment speech_only = mix;
      if (cfg.noise) {
        qn = ToSegment(Quantized(noise.samples, gain));
        for (std::size_t k = 0; k < mix.size(); ++k) mix.samples[k] += qn.samples[k];
      }

      const std::string id = ExampleId(split.name, i);
      const std::string base = std::string(split.name) + "/";
      const std::string wav = id + ".wav";
      WriteAudio(cfg.out_dir / (base + "mix/" + wav), mix);
      WriteAudio(cfg.out_dir / (base + "s1/" + wav), qt);
      WriteAudio(cfg.out_dir / (base + "s2/" + wav), qv);
      if (cfg.noise) WriteAudio(cfg.out_dir / (base + "noise/" + wav), qn);
      const AudioSegment ref = ToSegment(
          Quantized(SynthUtterance(target, cfg.reference_s, ref_seed).samples, 1.0));
      WriteAudio(cfg.out_dir / (base + "ref/" + wav), ref);

      ExampleRecord rec;
      rec.mixture_path = base + "mix/" + wav;
      rec.target_path = base + "s1/" + wav;
      rec.reference_path = base + "ref/" + wav;
      rec.target_speaker_id = target.speaker_id;
      rec.interference_speaker_ids = {interferer.speaker_id};
      rec.mix_snr_db = SnrDb(qt, qv);
      if (cfg.noise) rec.noise_snr_db = SnrDb(speech_only, qn);
      records.push_back(rec);

      if (cfg.both_targets) {
        const AudioSegment ref2 = ToSegment(Quantized(
            SynthUtterance(interferer, cfg.reference_s, interf_ref_seed).samples, 1.0));
        WriteAudio(cfg.out_dir / (base + "ref2/" + wav), ref2);
        ExampleRecord second = rec;
        second.target_path = base + "s2/" + wav;
        second.reference_path = base + "ref2/" + wav;
        second.target_speaker_id = interferer.speaker_id;
        second.interference_speaker_ids = {target.speaker_id};
        second.mix_snr_db = SnrDb(qv, qt);
        records.push_back(second);
      }
    }
    WriteManifest(records, *manifest_paths[s]);
  }
  return manifests;
}

}  // namespace irasep
