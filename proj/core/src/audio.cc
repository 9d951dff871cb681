// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "irasep/error.h"

namespace irasep {
namespace {

uint32_t ReadLe32(const char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
  return v;
}

uint16_t ReadLe16(const char* p) {
  return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                               (static_cast<uint8_t>(p[1]) << 8));
}

void PutLe32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutLe16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

int16_t QuantizeSample(double value) {
  double scaled = std::nearbyint(value * 32768.0);
  scaled = std::clamp(scaled, -32768.0, 32767.0);
  return static_cast<int16_t>(scaled);
}

double DequantizeSample(int16_t value) { return value / 32768.0; }

void CheckAudio(const AudioSegment& audio) {
  if (audio.sample_rate != kSampleRate) {
    throw Error("format", "unsupported sample rate " +
                              std::to_string(audio.sample_rate) +
                              " (expected 8000)");
  }
  for (double v : audio.samples) {
    if (!std::isfinite(v)) throw Error("format", "non-finite sample");
  }
}

AudioSegment LoadAudio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open audio file " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 12 || data.compare(0, 4, "RIFF") != 0 ||
      data.compare(8, 4, "WAVE") != 0) {
    throw Error("format", "not a RIFF/WAVE file: " + path.string());
  }
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const char* chunk = data.data() + pos;
    uint32_t size = ReadLe32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > data.size()) {
      throw Error("format", "truncated chunk in " + path.string());
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error("format", "short fmt chunk in " + path.string());
      format = ReadLe16(data.data() + body);
      channels = ReadLe16(data.data() + body + 2);
      rate = ReadLe32(data.data() + body + 4);
      bits = ReadLe16(data.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error("format", "data before fmt in " + path.string());
      if (format != 1 || bits != 16) {
        throw Error("format", "only 16-bit linear PCM is supported: " + path.string());
      }
      if (channels != 1) {
        throw Error("format", "expected mono audio, got " +
                                  std::to_string(channels) + " channels: " +
                                  path.string());
      }
      if (rate != static_cast<uint32_t>(kSampleRate)) {
        throw Error("format", "unsupported sample rate " + std::to_string(rate) +
                                  " (expected 8000): " + path.string());
      }
      AudioSegment audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        auto raw = static_cast<int16_t>(ReadLe16(data.data() + body + 2 * i));
        audio.samples[i] = DequantizeSample(raw);
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw Error("format", "no data chunk in " + path.string());
}

void WriteAudio(const std::filesystem::path& path, const AudioSegment& audio) {
  CheckAudio(audio);
  const auto data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  PutLe32(&out, 36 + data_bytes);
  out.append("WAVEfmt ");
  PutLe32(&out, 16);
  PutLe16(&out, 1);
  PutLe16(&out, 1);
  PutLe32(&out, static_cast<uint32_t>(audio.sample_rate));
  PutLe32(&out, static_cast<uint32_t>(audio.sample_rate) * 2);
  PutLe16(&out, 2);
  PutLe16(&out, 16);
  out.append("data");
  PutLe32(&out, data_bytes);
  for (double v : audio.samples) PutLe16(&out, static_cast<uint16_t>(QuantizeSample(v)));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("io", "cannot write audio file " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("io", "short write to " + path.string());
}

std::size_t WindowSamples(double seconds, int sample_rate) {
  if (!(seconds > 0)) throw Error("invalid_argument", "segment length must be positive");
  auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  if (n == 0) throw Error("invalid_argument", "segment shorter than one sample");
  return n;
}

std::vector<AudioSegment> SegmentFixed(const AudioSegment& audio,
                                       double seconds) {
  const std::size_t window = WindowSamples(seconds, audio.sample_rate);
  if (audio.samples.empty()) throw Error("invalid_argument", "empty audio");
  std::vector<AudioSegment> out;
  for (std::size_t start = 0; start < audio.samples.size(); start += window) {
    AudioSegment seg;
    seg.sample_rate = audio.sample_rate;
    seg.samples.assign(window, 0.0);
    const std::size_t n = std::min(window, audio.samples.size() - start);
    std::copy_n(audio.samples.begin() + static_cast<std::ptrdiff_t>(start), n,
                seg.samples.begin());
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace irasep
