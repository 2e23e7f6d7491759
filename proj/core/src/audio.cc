// core/src/audio.cc

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "corpusforge/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "corpusforge/error.h"
#include "corpusforge/fileutil.h"

namespace corpusforge {

namespace fs = std::filesystem;

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct WavLayout {
  WavInfo info;
  std::uint64_t data_offset = 0;
};

// Walks the RIFF chunks up to the data chunk.
WavLayout parse_layout(std::ifstream& in, std::uint64_t file_size,
                       const fs::path& path) {
  const std::string name = path.string();
  std::array<unsigned char, 12> riff{};
  if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size())) {
    throw Error(name + ": unsupported encoding (not a RIFF/WAVE file)");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw Error(name + ": unsupported encoding (not a RIFF/WAVE file)");
  }

  WavLayout layout;
  bool have_fmt = false;
  std::uint16_t block_align = 0;
  std::uint64_t pos = 12;
  while (true) {
    std::array<unsigned char, 8> header{};
    if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
      throw Error(name + ": truncated file (no data chunk)");
    }
    pos += 8;
    const std::uint32_t size = le32(header.data() + 4);
    if (std::memcmp(header.data(), "fmt ", 4) == 0) {
      if (size < 16 || pos + size > file_size) {
        throw Error(name + ": truncated fmt chunk");
      }
      std::string fmt(size, '\0');
      in.read(fmt.data(), size);
      const auto* p = reinterpret_cast<const unsigned char*>(fmt.data());
      std::uint16_t format = le16(p);
      if (format == kFormatExtensible && size >= 26) format = le16(p + 24);
      const std::uint16_t channels = le16(p + 2);
      const std::uint32_t rate = le32(p + 4);
      block_align = le16(p + 12);
      const std::uint16_t bits = le16(p + 14);
      if (format != kFormatPcm) {
        throw Error(name + ": unsupported encoding (format code " +
                    std::to_string(format) + ")");
      }
      if (bits != 16) {
        throw Error(name + ": unsupported bit depth " + std::to_string(bits));
      }
      if (channels != 1 && channels != 2) {
        throw Error(name + ": unsupported channel count " +
                    std::to_string(channels));
      }
      if (rate == 0 || block_align != channels * 2) {
        throw Error(name + ": inconsistent fmt chunk");
      }
      layout.info.sample_rate = static_cast<int>(rate);
      layout.info.channels = channels;
      have_fmt = true;
    } else if (std::memcmp(header.data(), "data", 4) == 0) {
      if (!have_fmt) throw Error(name + ": data chunk before fmt chunk");
      if (pos + size > file_size || size % block_align != 0) {
        throw Error(name + ": truncated data chunk");
      }
      layout.info.frames = size / block_align;
      layout.data_offset = pos;
      return layout;
    } else {
      in.seekg(static_cast<std::streamoff>(size + (size & 1)), std::ios::cur);
    }
    pos += size + (size & 1);
    if (pos > file_size) throw Error(name + ": truncated file");
  }
}

float code_to_sample(double code) {
  return static_cast<float>(code >= 0 ? code / 32767.0 : code / 32768.0);
}

std::int16_t sample_to_code(float x) {
  if (std::isnan(x)) return 0;
  const double v = std::clamp(static_cast<double>(x), -1.0, 1.0);
  return static_cast<std::int16_t>(
      v >= 0 ? std::lround(v * 32767.0) : std::lround(v * 32768.0));
}

}  // namespace

WavInfo read_wav_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_layout(in, fs::file_size(path), path).info;
}

AudioBuffer read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const WavLayout layout = parse_layout(in, fs::file_size(path), path);
  const auto channels = static_cast<std::size_t>(layout.info.channels);
  std::string data(layout.info.frames * channels * 2, '\0');
  in.seekg(static_cast<std::streamoff>(layout.data_offset));
  if (!in.read(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw Error(path.string() + ": truncated data chunk");
  }

  AudioBuffer buffer;
  buffer.sample_rate = layout.info.sample_rate;
  buffer.samples.resize(layout.info.frames);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  for (std::size_t i = 0; i < layout.info.frames; ++i) {
    if (channels == 1) {
      buffer.samples[i] = code_to_sample(static_cast<std::int16_t>(le16(p + 2 * i)));
    } else {
      const auto left = static_cast<std::int16_t>(le16(p + 4 * i));
      const auto right = static_cast<std::int16_t>(le16(p + 4 * i + 2));
      buffer.samples[i] = code_to_sample((left + right) / 2.0);
    }
  }
  return buffer;
}

void write_wav(const AudioBuffer& buffer, const fs::path& path) {
  if (buffer.sample_rate <= 0) {
    throw ValidationError("write_wav: sample rate must be positive");
  }
  const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (float x : buffer.samples) put16(out, static_cast<std::uint16_t>(sample_to_code(x)));
  write_file_atomic(path, out);
}

AudioBuffer slice(const AudioBuffer& buffer, double start_s, double end_s) {
  const double duration = buffer.duration();
  const double half_sample = 0.5 / buffer.sample_rate;
  if (!(start_s >= 0.0) || !(start_s < end_s) || end_s > duration + half_sample) {
    throw ValidationError("slice [" + std::to_string(start_s) + ", " +
                          std::to_string(end_s) + "] outside [0, " +
                          std::to_string(duration) + "]");
  }
  const auto n = static_cast<long long>(buffer.samples.size());
  const long long first = std::llround(start_s * buffer.sample_rate);
  const long long last = std::min(n, std::llround(end_s * buffer.sample_rate));
  if (last <= first) {
    throw ValidationError("slice shorter than one sample");
  }
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(buffer.samples.begin() + first, buffer.samples.begin() + last);
  return out;
}

void check_vad_params(const VadParams& p) {
  if (!(p.hop_ms > 0) || !(p.frame_ms >= p.hop_ms)) {
    throw ValidationError("vad: need frame_ms >= hop_ms > 0");
  }
  if (!(p.min_speech_ms > 0) || !(p.min_gap_ms > 0) || !(p.pad_ms > 0) ||
      !(p.threshold_db > 0)) {
    throw ValidationError("vad: durations and threshold_db must be positive");
  }
}

namespace {

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

std::vector<SpeechSpan> energy_vad(const AudioBuffer& buffer,
                                   const VadParams& params) {
  check_vad_params(params);
  std::vector<SpeechSpan> spans;
  const std::size_t n = buffer.samples.size();
  if (n == 0) return spans;
  const double rate = buffer.sample_rate;
  const auto frame = std::max<std::size_t>(1, std::llround(params.frame_ms * rate / 1000.0));
  const auto hop = std::max<std::size_t>(1, std::llround(params.hop_ms * rate / 1000.0));
  const std::size_t frames = n <= frame ? 1 : 1 + (n - frame + hop - 1) / hop;

  std::vector<double> energy(frames);
  std::vector<double> level(frames);
  bool any_energy = false;
  for (std::size_t k = 0; k < frames; ++k) {
    const std::size_t begin = k * hop;
    const std::size_t end = std::min(n, begin + frame);
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sum += static_cast<double>(buffer.samples[i]) * buffer.samples[i];
    }
    energy[k] = sum / static_cast<double>(end - begin);
    any_energy = any_energy || energy[k] > 0.0;
    // Floor at -200 dB so digital silence sorts below everything else.
    level[k] = 10.0 * std::log10(std::max(energy[k], 1e-20));
  }
  if (!any_energy) return spans;

  const double threshold = percentile(level, 0.95) - params.threshold_db;
  const double duration = buffer.duration();
  // A run of frames [a, b] covers the hop-wide cells around each frame centre.
  const double lead = (static_cast<double>(frame) - hop) / 2.0;
  for (std::size_t k = 0; k < frames;) {
    if (!(energy[k] > 0.0 && level[k] > threshold)) {
      ++k;
      continue;
    }
    const std::size_t a = k;
    while (k < frames && energy[k] > 0.0 && level[k] > threshold) ++k;
    const std::size_t b = k - 1;
    const double start = std::clamp((a * hop + lead) / rate, 0.0, duration);
    const double end = std::clamp((b * hop + lead + hop) / rate, 0.0, duration);
    if (end > start) spans.push_back({start, end});
  }

  const double min_gap = params.min_gap_ms / 1000.0;
  std::vector<SpeechSpan> bridged;
  for (const auto& s : spans) {
    if (!bridged.empty() && s.start - bridged.back().end < min_gap) {
      bridged.back().end = s.end;
    } else {
      bridged.push_back(s);
    }
  }

  const double min_speech = params.min_speech_ms / 1000.0;
  const double pad = params.pad_ms / 1000.0;
  std::vector<SpeechSpan> out;
  for (const auto& s : bridged) {
    if (s.end - s.start < min_speech) continue;
    SpeechSpan padded{std::max(0.0, s.start - pad), std::min(duration, s.end + pad)};
    if (!out.empty() && padded.start <= out.back().end) {
      out.back().end = std::max(out.back().end, padded.end);
    } else {
      out.push_back(padded);
    }
  }
  return out;
}

}  // namespace corpusforge
