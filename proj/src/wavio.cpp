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

#include "wavio.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ssfdaf {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wav reader assumes a little-endian host");

struct Reader {
  std::ifstream f;
  explicit Reader(const std::string& path) : f(path, std::ios::binary) {}

  template <typename T>
  T get() {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw std::runtime_error("wav: truncated file");
    return v;
  }

  std::string tag() {
    char c[4];
    f.read(c, 4);
    if (!f) throw std::runtime_error("wav: truncated file");
    return std::string(c, 4);
  }
};

}  // namespace

WavData read_wav(const std::string& path) {
  Reader r(path);
  if (!r.f) throw std::runtime_error("wav: cannot open " + path);
  if (r.tag() != "RIFF") throw std::runtime_error("wav: not a RIFF file: " + path);
  r.get<std::uint32_t>();  // riff size
  if (r.tag() != "WAVE") throw std::runtime_error("wav: not a WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  WavData out;

  while (true) {
    char c[4];
    r.f.read(c, 4);
    if (!r.f) break;  // end of chunks
    const std::string id(c, 4);
    const std::uint32_t size = r.get<std::uint32_t>();
    if (id == "fmt ") {
      format = r.get<std::uint16_t>();
      channels = r.get<std::uint16_t>();
      rate = r.get<std::uint32_t>();
      r.get<std::uint32_t>();  // byte rate
      r.get<std::uint16_t>();  // block align
      bits = r.get<std::uint16_t>();
      if (size > 16) r.f.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error("wav: data before fmt in " + path);
      if (channels != 1) throw std::runtime_error("wav: only mono supported: " + path);
      if (format == 1 && bits == 16) {
        const std::size_t n = size / 2;
        std::vector<std::int16_t> raw(n);
        r.f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(size));
        if (!r.f) throw std::runtime_error("wav: truncated data in " + path);
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i] / 32768.0;
      } else if (format == 3 && bits == 32) {
        const std::size_t n = size / 4;
        std::vector<float> raw(n);
        r.f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(size));
        if (!r.f) throw std::runtime_error("wav: truncated data in " + path);
        out.samples.assign(raw.begin(), raw.end());
      } else {
        throw std::runtime_error("wav: unsupported format (need 16-bit PCM or float32): " + path);
      }
      out.sample_rate = static_cast<int>(rate);
      return out;
    } else {
      r.f.seekg(size + (size % 2), std::ios::cur);  // chunks are word-aligned
    }
  }
  throw std::runtime_error("wav: no data chunk in " + path);
}

void write_wav(const std::string& path, std::span<const double> samples, int sample_rate) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("wav: cannot open " + tmp);
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 4);
    const std::uint32_t riff_size = 36 + data_size;
    auto put16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    auto put32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    f.write("RIFF", 4);
    put32(riff_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put32(16);
    put16(3);  // IEEE float
    put16(1);  // mono
    put32(static_cast<std::uint32_t>(sample_rate));
    put32(static_cast<std::uint32_t>(sample_rate) * 4);
    put16(4);
    put16(32);
    f.write("data", 4);
    put32(data_size);
    for (double s : samples) {
      const float v = static_cast<float>(s);
      f.write(reinterpret_cast<const char*>(&v), 4);
    }
    if (!f) throw std::runtime_error("wav: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ssfdaf
