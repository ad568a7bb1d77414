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

#ifndef SSFDAF_ENGINE_HPP_
#define SSFDAF_ENGINE_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisemodel.hpp"
#include "spectral.hpp"
#include "statespace.hpp"

namespace ssfdaf {

// The four update schedules: E-step before M-step with L iterations (Em,
// NmfEm) or the reversed order with a single iteration (Me, NmfMe). The Nmf
// variants synthesize the observation noise from the dictionary; the others
// use the closed-form or recursive estimators.
enum class Variant { kEm, kMe, kNmfEm, kNmfMe };

std::string variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

struct VariantConfig {
  Variant variant = Variant::kNmfEm;
  int block_len = 1536;          // M
  int block_shift = 512;         // R
  int em_iters = 2;              // L; EM variants need >= 2, ME variants exactly 1
  int mm_steps = 3;              // P
  double transition = 0.9999;    // A
  double noise_recursion = 0.5;  // lambda (Me only)
  bool exact_error_power = false;
  double init_p = 1e-2;
  double init_psi_s = 1e-3;

  bool is_nmf() const { return variant == Variant::kNmfEm || variant == Variant::kNmfMe; }
  bool is_me_order() const { return variant == Variant::kMe || variant == Variant::kNmfMe; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct BlockResult {
  std::vector<double> echo_estimate;  // R samples from the block-final posterior
  std::vector<double> residual;       // y - echo_estimate
  std::vector<double> prior_error;    // time-domain e+ (last R samples)
};

class Engine {
 public:
  // dict is required for NMF variants and ignored otherwise.
  Engine(const VariantConfig& config, std::shared_ptr<const NoiseDictionary> dict);

  // x_block: the M most recent far-end samples; y_block: R mic samples.
  BlockResult process_block(std::span<const double> x_block, std::span<const double> y_block);

  // Streaming form: R new far-end samples; the M-length history is internal.
  BlockResult process_stream_block(std::span<const double> x_new,
                                   std::span<const double> y_block);

  // Restores the initial state; the dictionary is kept.
  void reset();

  const VariantConfig& config() const { return config_; }
  const FilterState& state() const { return state_; }
  const std::vector<double>& noise_cov() const { return psi_s_; }      // half-spectrum
  const std::vector<double>& process_cov() const { return psi_delta_; }
  const Activation& activation() const { return activation_; }
  const NoiseDictionary* dictionary() const { return dict_.get(); }

  // First M-R taps of IDFT(w_hat): the modeled impulse response.
  std::vector<double> filter_taps();

 private:
  std::vector<double> error_power_target(const FilterState& state, const FreqBlock& x,
                                         const FreqBlock& y);
  void update_noise_from_dictionary(const std::vector<double>& target);

  VariantConfig config_;
  std::shared_ptr<const NoiseDictionary> dict_;
  Dft dft_;
  std::optional<ConstraintKernel> kernel_;  // only when exact_error_power
  FilterState state_;
  std::vector<double> psi_delta_;
  std::vector<double> psi_s_;
  Activation activation_;
  bool activation_primed_ = false;
  std::vector<double> x_history_;  // M samples, streaming form only
};

}  // namespace ssfdaf

#endif  // SSFDAF_ENGINE_HPP_
