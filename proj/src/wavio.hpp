// Copyright 2026 The ssfdaf project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSFDAF_WAVIO_HPP_
#define SSFDAF_WAVIO_HPP_

#include <span>
#include <string>
#include <vector>

namespace ssfdaf {

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, [-1, 1] for integer PCM sources
};

// RIFF/WAVE, mono, 16-bit PCM or 32-bit IEEE float. Multi-channel files are
// rejected rather than silently downmixed.
WavData read_wav(const std::string& path);

// Writes 32-bit float mono; atomic (temp file + rename).
void write_wav(const std::string& path, std::span<const double> samples, int sample_rate);

}  // namespace ssfdaf

#endif  // SSFDAF_WAVIO_HPP_
