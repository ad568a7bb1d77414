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

#ifndef SSFDAF_STATESPACE_HPP_
#define SSFDAF_STATESPACE_HPP_

#include <span>
#include <vector>

#include "spectral.hpp"

namespace ssfdaf {

// Posterior mean of the DFT-domain filter plus its diagonal uncertainty.
// Both are half-spectra (M/2+1), consistent with FreqBlock storage.
struct FilterState {
  FreqBlock w_hat;
  std::vector<double> p_diag;
};

FilterState initial_state(int block_len, double p0);

// State-space parameters for one E-step: transition coefficient A, process
// noise diagonal, observation noise diagonal (half-spectra).
struct SsmParams {
  double transition = 0.0;  // A, 0 < A < 1
  std::vector<double> psi_delta;
  std::vector<double> psi_s;
  int block_len = 0;   // M
  int block_shift = 0; // R
};

struct EStepOutput {
  FilterState state;
  FreqBlock prior_error;           // e+ = y - C(x ∘ w+)
  std::vector<double> gain_diag;   // Λ
};

// One Kalman update per bin:
//   w+ = A w_prev,  P+ = A^2 P_prev + psi_delta
//   Λ  = P+ / (|x|^2 P+ + (M/R) psi_s + eps)
//   e+ = y - C(x ∘ w+)
//   w  = w+ + Λ conj(x) e+,  P = (1 - (R/M) Λ |x|^2) P+
// eps floors the denominator where excitation and noise both vanish.
EStepOutput kalman_estep(Dft& dft, const FilterState& prev, const FreqBlock& x,
                         const FreqBlock& y, const SsmParams& params);

// (1 - A^2)(|w_m|^2 + P_mm) per bin.
std::vector<double> mstep_process_noise(const FilterState& state, double transition);

// |e_m|^2 + (R/M)|x_m|^2 P_mm per bin with the posterior error
// e = y - C(x ∘ w_hat).
std::vector<double> mstep_observation_noise(Dft& dft, const FreqBlock& y, const FreqBlock& x,
                                            const FilterState& state, int block_shift);

// lambda * prev + (1 - lambda) * |e+|^2 per bin.
std::vector<double> recursive_noise_estimate(std::span<const double> prev_psi_s,
                                             const FreqBlock& prior_error, double lambda);

// Circular kernel |[F diag(mask_R) F^-1]_{m,n}|^2 as a function of
// (m - n) mod M. Used to evaluate the exact posterior-error power
// diag(e e^H + C P C^H) without forming the M x M projection.
class ConstraintKernel {
 public:
  ConstraintKernel(Dft& dft, int block_shift);

  // |e_m|^2 + [C P C^H]_mm per bin; e = y - C(x ∘ w_hat).
  std::vector<double> exact_error_power(Dft& dft, const FreqBlock& y, const FreqBlock& x,
                                        const FilterState& state) const;

  const std::vector<double>& kernel() const { return kernel_; }

 private:
  int block_len_;
  int block_shift_;
  std::vector<double> kernel_;                      // length M
  std::vector<std::complex<double>> kernel_spec_;   // r2c of kernel_, M/2+1
};

}  // namespace ssfdaf

#endif  // SSFDAF_STATESPACE_HPP_
