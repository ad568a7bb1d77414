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

#ifndef SSFDAF_SPECTRAL_HPP_
#define SSFDAF_SPECTRAL_HPP_

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ssfdaf {

// DFT convention used throughout: unnormalized forward, 1/M inverse.
// Spectra of real blocks are stored as the non-redundant half, bins 0..M/2;
// the mirrored full spectrum is materialized only where the math needs it.
struct FreqBlock {
  int block_len = 0;                       // M (even)
  std::vector<std::complex<double>> bins;  // M/2 + 1 entries

  int num_bins() const { return static_cast<int>(bins.size()); }
};

// Full conjugate-symmetric length-M spectrum from the stored half.
std::vector<std::complex<double>> mirror_spectrum(const FreqBlock& f);

// Mirrors a real half-spectrum quantity (power, covariance diagonal) to length M.
std::vector<double> mirror_real(std::span<const double> half, int block_len);

// Forward/inverse transform plan for one block length. Carries FFTW plans and
// scratch buffers, so use one instance per worker; instances may be moved
// across threads but not shared concurrently.
class Dft {
 public:
  explicit Dft(int block_len);  // throws std::invalid_argument unless even and >= 2
  ~Dft();

  Dft(Dft&& other) noexcept;
  Dft& operator=(Dft&& other) noexcept;
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  int block_len() const { return block_len_; }
  int num_bins() const { return block_len_ / 2 + 1; }

  FreqBlock forward(std::span<const double> block);      // block.size() == M
  std::vector<double> inverse(const FreqBlock& spec);    // returns length M

 private:
  struct Impl;
  int block_len_ = 0;
  std::unique_ptr<Impl> impl_;
};

// Input block x_{tau*R-M+1} .. x_{tau*R} (1-based stream indices, tau >= 1);
// samples before the stream start are zero.
std::vector<double> make_input_block(std::span<const double> stream, long tau, int block_len,
                                     int block_shift);

// Last R samples of IDFT(x ∘ w): the linear-convolution output of the
// overlap-save block, valid when w is the DFT of a front-loaded
// (M-R)-tap filter.
std::vector<double> overlap_save_convolve(Dft& dft, const FreqBlock& x, const FreqBlock& w,
                                          int block_shift);

// DFT of the R-sample observation block zero-padded in front to length M.
FreqBlock freq_observation(Dft& dft, std::span<const double> block);

// The projection F Q1 Q1^T F^-1: inverse transform, zero the first M-R time
// samples, forward transform. Idempotent and self-adjoint.
FreqBlock apply_overlap_save_constraint(Dft& dft, const FreqBlock& v, int block_shift);

std::vector<double> hamming_window(int len);

// STFT frames of a training signal: frame n covers samples
// [n*frame_shift, n*frame_shift + M), windowed, not zero-padded.
struct TrainingMatrix {
  int block_len = 0;      // M
  int frame_shift = 0;    // R_tr
  Eigen::MatrixXcd spectra;  // (M/2+1) x N, column per frame

  int num_frames() const { return static_cast<int>(spectra.cols()); }
};

TrainingMatrix stft_training(Dft& dft, std::span<const double> signal, int frame_shift,
                             std::span<const double> window);

}  // namespace ssfdaf

#endif  // SSFDAF_SPECTRAL_HPP_
