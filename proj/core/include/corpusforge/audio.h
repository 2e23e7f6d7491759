// core/include/corpusforge/audio.h

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

#ifndef CORPUSFORGE_AUDIO_H_
#define CORPUSFORGE_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace corpusforge {

/// Mono PCM audio with samples in [-1, 1].
struct AudioBuffer {
  int sample_rate = 16000;
  std::vector<float> samples;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
  bool operator==(const AudioBuffer&) const = default;
};

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  std::size_t frames = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

// Header-only inspection; same format checks as read_wav().
WavInfo read_wav_info(const std::filesystem::path& path);

/// Reads 16-bit PCM RIFF/WAVE, mono or stereo. Stereo is averaged. Negative
/// codes scale by 1/32768 and positive codes by 1/32767, so full scale maps
/// to exactly -1 and 1.
AudioBuffer read_wav(const std::filesystem::path& path);

// Always 16-bit mono. Samples are clamped to [-1, 1] before quantization.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

AudioBuffer slice(const AudioBuffer& buffer, double start_s, double end_s);

struct SpeechSpan {
  double start = 0.0;
  double end = 0.0;

  bool operator==(const SpeechSpan&) const = default;
};

struct VadParams {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  // Frames quieter than (95th percentile frame level - threshold_db) are
  // treated as non-speech.
  double threshold_db = 30.0;
  double min_speech_ms = 200.0;
  double min_gap_ms = 300.0;
  double pad_ms = 100.0;
};

// Throws ValidationError when the parameters are inconsistent.
void check_vad_params(const VadParams& params);

/// Energy-based voice activity detection. Spans are sorted and disjoint.
std::vector<SpeechSpan> energy_vad(const AudioBuffer& buffer,
                                   const VadParams& params = {});

}  // namespace corpusforge

#endif  // CORPUSFORGE_AUDIO_H_
