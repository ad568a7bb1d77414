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

#include "statespace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ssfdaf {

namespace {

double norm_sq(const std::complex<double>& z) { return std::norm(z); }

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": nonfinite value");
}

void check_finite(const FreqBlock& f, const char* what) {
  for (const auto& z : f.bins)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument(std::string(what) + ": nonfinite value");
}

}  // namespace

FilterState initial_state(int block_len, double p0) {
  FilterState s;
  s.w_hat.block_len = block_len;
  s.w_hat.bins.assign(static_cast<size_t>(block_len / 2 + 1), {0.0, 0.0});
  s.p_diag.assign(static_cast<size_t>(block_len / 2 + 1), p0);
  return s;
}

EStepOutput kalman_estep(Dft& dft, const FilterState& prev, const FreqBlock& x,
                         const FreqBlock& y, const SsmParams& params) {
  const int bins = dft.num_bins();
  if (x.num_bins() != bins || y.num_bins() != bins || prev.w_hat.num_bins() != bins ||
      static_cast<int>(prev.p_diag.size()) != bins ||
      static_cast<int>(params.psi_delta.size()) != bins ||
      static_cast<int>(params.psi_s.size()) != bins)
    throw std::invalid_argument("kalman_estep: size mismatch");
  if (!(params.transition > 0.0 && params.transition < 1.0))
    throw std::invalid_argument("kalman_estep: transition coefficient out of (0,1)");
  check_finite(x, "kalman_estep x");
  check_finite(y, "kalman_estep y");
  check_finite(prev.p_diag, "kalman_estep p_diag");
  check_finite(params.psi_delta, "kalman_estep psi_delta");
  check_finite(params.psi_s, "kalman_estep psi_s");

  const double a = params.transition;
  const double m_over_r = static_cast<double>(params.block_len) / params.block_shift;
  const double r_over_m = 1.0 / m_over_r;

  // Prediction.
  FreqBlock w_pred;
  w_pred.block_len = params.block_len;
  w_pred.bins.resize(static_cast<size_t>(bins));
  std::vector<double> p_pred(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    w_pred.bins[static_cast<size_t>(i)] = a * prev.w_hat.bins[static_cast<size_t>(i)];
    p_pred[static_cast<size_t>(i)] =
        a * a * prev.p_diag[static_cast<size_t>(i)] + params.psi_delta[static_cast<size_t>(i)];
  }

  // Denominator floor, scaled to the excitation level.
  double mean_excited = 0.0;
  for (int i = 0; i < bins; ++i)
    mean_excited += norm_sq(x.bins[static_cast<size_t>(i)]) * p_pred[static_cast<size_t>(i)];
  mean_excited /= bins;
  const double eps = 1e-12 * std::max(1.0, mean_excited);

  // Prior error through the overlap-save constraint.
  FreqBlock echo_pred;
  echo_pred.block_len = params.block_len;
  echo_pred.bins.resize(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i)
    echo_pred.bins[static_cast<size_t>(i)] =
        x.bins[static_cast<size_t>(i)] * w_pred.bins[static_cast<size_t>(i)];
  FreqBlock constrained = apply_overlap_save_constraint(dft, echo_pred, params.block_shift);

  EStepOutput out;
  out.prior_error.block_len = params.block_len;
  out.prior_error.bins.resize(static_cast<size_t>(bins));
  out.gain_diag.resize(static_cast<size_t>(bins));
  out.state.w_hat.block_len = params.block_len;
  out.state.w_hat.bins.resize(static_cast<size_t>(bins));
  out.state.p_diag.resize(static_cast<size_t>(bins));

  for (int i = 0; i < bins; ++i) {
    const size_t s = static_cast<size_t>(i);
    const double x2 = norm_sq(x.bins[s]);
    const double gain = p_pred[s] / (x2 * p_pred[s] + m_over_r * params.psi_s[s] + eps);
    const std::complex<double> e_prior = y.bins[s] - constrained.bins[s];
    out.prior_error.bins[s] = e_prior;
    out.gain_diag[s] = gain;
    out.state.w_hat.bins[s] = w_pred.bins[s] + gain * std::conj(x.bins[s]) * e_prior;
    out.state.p_diag[s] = std::max(0.0, (1.0 - r_over_m * gain * x2) * p_pred[s]);
  }
  return out;
}

std::vector<double> mstep_process_noise(const FilterState& state, double transition) {
  const double f = 1.0 - transition * transition;
  std::vector<double> out(state.p_diag.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = f * (norm_sq(state.w_hat.bins[i]) + state.p_diag[i]);
  return out;
}

std::vector<double> mstep_observation_noise(Dft& dft, const FreqBlock& y, const FreqBlock& x,
                                            const FilterState& state, int block_shift) {
  const int bins = dft.num_bins();
  const double r_over_m = static_cast<double>(block_shift) / dft.block_len();
  FreqBlock echo;
  echo.block_len = dft.block_len();
  echo.bins.resize(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i)
    echo.bins[static_cast<size_t>(i)] =
        x.bins[static_cast<size_t>(i)] * state.w_hat.bins[static_cast<size_t>(i)];
  FreqBlock constrained = apply_overlap_save_constraint(dft, echo, block_shift);

  std::vector<double> out(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    const size_t s = static_cast<size_t>(i);
    const std::complex<double> e = y.bins[s] - constrained.bins[s];
    out[s] = norm_sq(e) + r_over_m * norm_sq(x.bins[s]) * state.p_diag[s];
  }
  return out;
}

std::vector<double> recursive_noise_estimate(std::span<const double> prev_psi_s,
                                             const FreqBlock& prior_error, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("recursive_noise_estimate: lambda out of [0,1]");
  std::vector<double> out(prev_psi_s.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = lambda * prev_psi_s[i] + (1.0 - lambda) * norm_sq(prior_error.bins[i]);
  return out;
}

ConstraintKernel::ConstraintKernel(Dft& dft, int block_shift)
    : block_len_(dft.block_len()), block_shift_(block_shift) {
  const int m = block_len_;
  const int r = block_shift;
  kernel_.resize(static_cast<size_t>(m));
  // |(1/M) sum_{t=M-R}^{M-1} exp(-2*pi*i*u*t/M)|^2: squared Dirichlet kernel.
  for (int u = 0; u < m; ++u) {
    if (u == 0) {
      kernel_[0] = static_cast<double>(r) * r / (static_cast<double>(m) * m);
      continue;
    }
    const double num = std::sin(std::numbers::pi * u * r / m);
    const double den = std::sin(std::numbers::pi * u / m);
    const double g = num / (m * den);
    kernel_[static_cast<size_t>(u)] = g * g;
  }
  FreqBlock spec = dft.forward(kernel_);
  kernel_spec_ = std::move(spec.bins);
}

std::vector<double> ConstraintKernel::exact_error_power(Dft& dft, const FreqBlock& y,
                                                        const FreqBlock& x,
                                                        const FilterState& state) const {
  const int bins = dft.num_bins();
  std::vector<double> excited_half(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i)
    excited_half[static_cast<size_t>(i)] =
        std::norm(x.bins[static_cast<size_t>(i)]) * state.p_diag[static_cast<size_t>(i)];

  // diag(C P C^H)_m = sum_n kernel((m-n) mod M) |x_n|^2 P_nn: a circular
  // convolution over the mirrored full spectrum.
  FreqBlock excited_spec = dft.forward(mirror_real(excited_half, block_len_));
  FreqBlock prod;
  prod.block_len = block_len_;
  prod.bins.resize(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i)
    prod.bins[static_cast<size_t>(i)] =
        excited_spec.bins[static_cast<size_t>(i)] * kernel_spec_[static_cast<size_t>(i)];
  // inverse() already divides by M; circular convolution needs no extra scale.
  std::vector<double> smeared = dft.inverse(prod);
  smeared.resize(static_cast<size_t>(block_len_));

  std::vector<double> out = mstep_observation_noise(dft, y, x, state, block_shift_);
  for (int i = 0; i < bins; ++i) {
    const size_t s = static_cast<size_t>(i);
    // Replace the (R/M)|x|^2 P approximation with the exact smeared term.
    out[s] -= static_cast<double>(block_shift_) / block_len_ * excited_half[s];
    out[s] += std::max(0.0, smeared[s]);
    out[s] = std::max(0.0, out[s]);
  }
  return out;
}

}  // namespace ssfdaf
