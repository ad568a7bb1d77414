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

#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssfdaf {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kEm: return "em";
    case Variant::kMe: return "me";
    case Variant::kNmfEm: return "nmf-em";
    case Variant::kNmfMe: return "nmf-me";
  }
  return "unknown";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  if (name == "em") return Variant::kEm;
  if (name == "me") return Variant::kMe;
  if (name == "nmf-em") return Variant::kNmfEm;
  if (name == "nmf-me") return Variant::kNmfMe;
  return std::nullopt;
}

void VariantConfig::validate() const {
  if (block_len < 4 || block_len % 2 != 0)
    throw std::invalid_argument("block_len: must be even and >= 4");
  if (block_shift < 1 || block_shift >= block_len)
    throw std::invalid_argument("block_shift: must satisfy 1 <= R < M");
  if (!(transition > 0.0 && transition < 1.0))
    throw std::invalid_argument("transition: must lie in (0,1)");
  if (mm_steps < 1) throw std::invalid_argument("mm_steps: must be >= 1");
  if (!(noise_recursion >= 0.0 && noise_recursion <= 1.0))
    throw std::invalid_argument("noise_recursion: must lie in [0,1]");
  if (is_me_order()) {
    // The reversed order is only defined for a single iteration.
    if (em_iters != 1) throw std::invalid_argument("em_iters: ME variants require L = 1");
  } else {
    if (em_iters < 2) throw std::invalid_argument("em_iters: EM variants require L >= 2");
  }
  if (!(init_p > 0.0) || !(init_psi_s > 0.0))
    throw std::invalid_argument("init_p/init_psi_s: must be positive");
}

Engine::Engine(const VariantConfig& config, std::shared_ptr<const NoiseDictionary> dict)
    : config_(config), dict_(std::move(dict)), dft_(config.block_len),
      state_(initial_state(config.block_len, config.init_p)) {
  config_.validate();
  if (config_.is_nmf()) {
    if (!dict_) throw std::invalid_argument("dict: NMF variants require a dictionary");
    if (dict_->block_len != config_.block_len)
      throw std::invalid_argument("dict: dictionary block length does not match engine");
  } else {
    dict_.reset();
  }
  if (config_.exact_error_power) kernel_.emplace(dft_, config_.block_shift);
  reset();
}

void Engine::reset() {
  const int bins = dft_.num_bins();
  state_ = initial_state(config_.block_len, config_.init_p);
  psi_s_.assign(static_cast<size_t>(bins), config_.init_psi_s);
  const double a = config_.transition;
  psi_delta_.assign(static_cast<size_t>(bins), (1.0 - a * a) * config_.init_p);
  activation_primed_ = false;
  if (dict_) activation_.v = Eigen::VectorXd::Constant(dict_->num_atoms(), kActivationFloor);
  x_history_.assign(static_cast<size_t>(config_.block_len), 0.0);
}

std::vector<double> Engine::error_power_target(const FilterState& state, const FreqBlock& x,
                                               const FreqBlock& y) {
  if (kernel_) return kernel_->exact_error_power(dft_, y, x, state);
  return mstep_observation_noise(dft_, y, x, state, config_.block_shift);
}

void Engine::update_noise_from_dictionary(const std::vector<double>& target) {
  if (!activation_primed_) {
    // First block: uniform activation scaled to the first observed power.
    const double t_mean = std::max(dict_->atoms.sum() / dict_->atoms.rows(), kAtomFloor);
    double p_mean = 0.0;
    for (double t : target) p_mean += t;
    p_mean /= static_cast<double>(target.size());
    activation_.v = Eigen::VectorXd::Constant(dict_->num_atoms(),
                                              std::max(p_mean / t_mean, kActivationFloor));
    activation_primed_ = true;
  }
  activation_ = infer_activations(*dict_, activation_, target, config_.mm_steps);
  psi_s_ = synthesize_cov(*dict_, activation_);
}

BlockResult Engine::process_block(std::span<const double> x_block,
                                  std::span<const double> y_block) {
  if (static_cast<int>(x_block.size()) != config_.block_len)
    throw std::invalid_argument("process_block: x block must hold M samples");
  if (static_cast<int>(y_block.size()) != config_.block_shift)
    throw std::invalid_argument("process_block: y block must hold R samples");

  const FreqBlock x = dft_.forward(x_block);
  const FreqBlock y = freq_observation(dft_, y_block);

  SsmParams params;
  params.transition = config_.transition;
  params.block_len = config_.block_len;
  params.block_shift = config_.block_shift;

  EStepOutput estep;
  if (config_.is_me_order()) {
    // M-step first: parameters from the predicted state and prior error.
    FreqBlock echo_pred;
    echo_pred.block_len = config_.block_len;
    echo_pred.bins.resize(x.bins.size());
    for (size_t i = 0; i < x.bins.size(); ++i)
      echo_pred.bins[i] = x.bins[i] * (config_.transition * state_.w_hat.bins[i]);
    const FreqBlock constrained =
        apply_overlap_save_constraint(dft_, echo_pred, config_.block_shift);
    FreqBlock prior_error;
    prior_error.block_len = config_.block_len;
    prior_error.bins.resize(y.bins.size());
    for (size_t i = 0; i < y.bins.size(); ++i)
      prior_error.bins[i] = y.bins[i] - constrained.bins[i];

    if (config_.variant == Variant::kNmfMe) {
      // Instantaneous prior error power as the dictionary target.
      std::vector<double> target(prior_error.bins.size());
      for (size_t i = 0; i < target.size(); ++i) target[i] = std::norm(prior_error.bins[i]);
      update_noise_from_dictionary(target);
    } else {
      psi_s_ = recursive_noise_estimate(psi_s_, prior_error, config_.noise_recursion);
    }
    psi_delta_ = mstep_process_noise(state_, config_.transition);

    params.psi_delta = psi_delta_;
    params.psi_s = psi_s_;
    estep = kalman_estep(dft_, state_, x, y, params);
  } else {
    // E-step before M-step, L iterations; every iteration predicts from the
    // previous block's final posterior with the current parameters.
    for (int l = 0; l < config_.em_iters; ++l) {
      params.psi_delta = psi_delta_;
      params.psi_s = psi_s_;
      estep = kalman_estep(dft_, state_, x, y, params);

      psi_delta_ = mstep_process_noise(estep.state, config_.transition);
      std::vector<double> target = error_power_target(estep.state, x, y);
      if (config_.variant == Variant::kNmfEm) {
        update_noise_from_dictionary(target);
      } else {
        psi_s_ = std::move(target);
      }
    }
  }
  state_ = estep.state;

  BlockResult result;
  result.echo_estimate = overlap_save_convolve(dft_, x, state_.w_hat, config_.block_shift);
  result.residual.resize(y_block.size());
  for (size_t i = 0; i < y_block.size(); ++i)
    result.residual[i] = y_block[i] - result.echo_estimate[i];
  std::vector<double> e_time = dft_.inverse(estep.prior_error);
  result.prior_error.assign(e_time.end() - config_.block_shift, e_time.end());
  return result;
}

BlockResult Engine::process_stream_block(std::span<const double> x_new,
                                         std::span<const double> y_block) {
  if (static_cast<int>(x_new.size()) != config_.block_shift)
    throw std::invalid_argument("process_stream_block: expected R new input samples");
  std::shift_left(x_history_.begin(), x_history_.end(), config_.block_shift);
  std::copy(x_new.begin(), x_new.end(), x_history_.end() - config_.block_shift);
  return process_block(x_history_, y_block);
}

std::vector<double> Engine::filter_taps() {
  std::vector<double> taps = dft_.inverse(state_.w_hat);
  taps.resize(static_cast<size_t>(config_.block_len - config_.block_shift));
  return taps;
}

}  // namespace ssfdaf
