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

#include "spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ssfdaf {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Dft::Impl {
  double* real = nullptr;          // length M
  fftw_complex* spec = nullptr;    // length M/2+1
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(int m) {
    real = fftw_alloc_real(static_cast<size_t>(m));
    spec = fftw_alloc_complex(static_cast<size_t>(m / 2 + 1));
    if (real == nullptr || spec == nullptr) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(m, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(m, spec, real, FFTW_ESTIMATE);
    if (fwd == nullptr || inv == nullptr) throw std::runtime_error("fftw plan creation failed");
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd != nullptr) fftw_destroy_plan(fwd);
    if (inv != nullptr) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

Dft::Dft(int block_len) : block_len_(block_len) {
  if (block_len < 2 || block_len % 2 != 0)
    throw std::invalid_argument("Dft: block length must be even and >= 2");
  impl_ = std::make_unique<Impl>(block_len);
}

Dft::~Dft() = default;
Dft::Dft(Dft&& other) noexcept = default;
Dft& Dft::operator=(Dft&& other) noexcept = default;

FreqBlock Dft::forward(std::span<const double> block) {
  if (static_cast<int>(block.size()) != block_len_)
    throw std::invalid_argument("Dft::forward: block length mismatch");
  std::copy(block.begin(), block.end(), impl_->real);
  fftw_execute(impl_->fwd);
  FreqBlock out;
  out.block_len = block_len_;
  out.bins.resize(static_cast<size_t>(num_bins()));
  for (int i = 0; i < num_bins(); ++i)
    out.bins[static_cast<size_t>(i)] = {impl_->spec[i][0], impl_->spec[i][1]};
  return out;
}

std::vector<double> Dft::inverse(const FreqBlock& spec) {
  if (spec.block_len != block_len_ || spec.num_bins() != num_bins())
    throw std::invalid_argument("Dft::inverse: spectrum size mismatch");
  for (int i = 0; i < num_bins(); ++i) {
    impl_->spec[i][0] = spec.bins[static_cast<size_t>(i)].real();
    impl_->spec[i][1] = spec.bins[static_cast<size_t>(i)].imag();
  }
  fftw_execute(impl_->inv);
  std::vector<double> out(static_cast<size_t>(block_len_));
  const double scale = 1.0 / block_len_;
  for (int i = 0; i < block_len_; ++i) out[static_cast<size_t>(i)] = impl_->real[i] * scale;
  return out;
}

std::vector<std::complex<double>> mirror_spectrum(const FreqBlock& f) {
  const int m = f.block_len;
  std::vector<std::complex<double>> full(static_cast<size_t>(m));
  for (int i = 0; i <= m / 2; ++i) full[static_cast<size_t>(i)] = f.bins[static_cast<size_t>(i)];
  for (int i = m / 2 + 1; i < m; ++i)
    full[static_cast<size_t>(i)] = std::conj(f.bins[static_cast<size_t>(m - i)]);
  return full;
}

std::vector<double> mirror_real(std::span<const double> half, int block_len) {
  if (static_cast<int>(half.size()) != block_len / 2 + 1)
    throw std::invalid_argument("mirror_real: half spectrum size mismatch");
  std::vector<double> full(static_cast<size_t>(block_len));
  for (int i = 0; i <= block_len / 2; ++i) full[static_cast<size_t>(i)] = half[static_cast<size_t>(i)];
  for (int i = block_len / 2 + 1; i < block_len; ++i)
    full[static_cast<size_t>(i)] = half[static_cast<size_t>(block_len - i)];
  return full;
}

std::vector<double> make_input_block(std::span<const double> stream, long tau, int block_len,
                                     int block_shift) {
  if (tau < 1) throw std::invalid_argument("make_input_block: tau must be >= 1");
  std::vector<double> block(static_cast<size_t>(block_len), 0.0);
  const long end = tau * block_shift;  // exclusive, 0-based
  const long begin = end - block_len;
  for (long i = std::max<long>(begin, 0); i < std::min<long>(end, static_cast<long>(stream.size()));
       ++i)
    block[static_cast<size_t>(i - begin)] = stream[static_cast<size_t>(i)];
  return block;
}

std::vector<double> overlap_save_convolve(Dft& dft, const FreqBlock& x, const FreqBlock& w,
                                          int block_shift) {
  if (x.num_bins() != w.num_bins())
    throw std::invalid_argument("overlap_save_convolve: spectrum size mismatch");
  FreqBlock prod;
  prod.block_len = x.block_len;
  prod.bins.resize(x.bins.size());
  for (size_t i = 0; i < x.bins.size(); ++i) prod.bins[i] = x.bins[i] * w.bins[i];
  std::vector<double> time = dft.inverse(prod);
  return {time.end() - block_shift, time.end()};
}

FreqBlock freq_observation(Dft& dft, std::span<const double> block) {
  const int m = dft.block_len();
  const int r = static_cast<int>(block.size());
  if (r > m) throw std::invalid_argument("freq_observation: block longer than M");
  std::vector<double> padded(static_cast<size_t>(m), 0.0);
  std::copy(block.begin(), block.end(), padded.begin() + (m - r));
  return dft.forward(padded);
}

FreqBlock apply_overlap_save_constraint(Dft& dft, const FreqBlock& v, int block_shift) {
  std::vector<double> time = dft.inverse(v);
  std::fill(time.begin(), time.end() - block_shift, 0.0);
  return dft.forward(time);
}

std::vector<double> hamming_window(int len) {
  std::vector<double> w(static_cast<size_t>(len));
  for (int n = 0; n < len; ++n)
    w[static_cast<size_t>(n)] =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (len - 1));
  return w;
}

TrainingMatrix stft_training(Dft& dft, std::span<const double> signal, int frame_shift,
                             std::span<const double> window) {
  const int m = dft.block_len();
  if (static_cast<int>(window.size()) != m)
    throw std::invalid_argument("stft_training: window length must equal block length");
  if (static_cast<long>(signal.size()) < m)
    throw std::invalid_argument("stft_training: signal shorter than one frame");
  if (frame_shift < 1) throw std::invalid_argument("stft_training: frame shift must be >= 1");

  const int num_frames = static_cast<int>((signal.size() - static_cast<size_t>(m)) /
                                          static_cast<size_t>(frame_shift)) + 1;
  TrainingMatrix out;
  out.block_len = m;
  out.frame_shift = frame_shift;
  out.spectra.resize(m / 2 + 1, num_frames);

  std::vector<double> frame(static_cast<size_t>(m));
  for (int n = 0; n < num_frames; ++n) {
    const size_t off = static_cast<size_t>(n) * static_cast<size_t>(frame_shift);
    for (int i = 0; i < m; ++i)
      frame[static_cast<size_t>(i)] = window[static_cast<size_t>(i)] * signal[off + static_cast<size_t>(i)];
    FreqBlock spec = dft.forward(frame);
    for (int i = 0; i <= m / 2; ++i) out.spectra(i, n) = spec.bins[static_cast<size_t>(i)];
  }
  return out;
}

}  // namespace ssfdaf
