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

#ifndef SSFDAF_NOISEMODEL_HPP_
#define SSFDAF_NOISEMODEL_HPP_

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral.hpp"

namespace ssfdaf {

// Multiplicative updates cannot leave zero and the IS divergence blows up
// there, so dictionary entries, activations and power targets are floored.
inline constexpr double kAtomFloor = 1e-10;
inline constexpr double kActivationFloor = 1e-10;
inline constexpr double kPowerFloor = 1e-12;

enum class WindowKind : int { kHamming = 0, kRectangular = 1 };

// Nonnegative spectral basis, half-spectrum rows: (M/2+1) x K.
struct NoiseDictionary {
  int block_len = 0;     // M
  int sample_rate = 0;
  int frame_shift = 0;   // R_tr used during training
  WindowKind window = WindowKind::kHamming;
  Eigen::MatrixXd atoms;

  // IS divergence at training checkpoints (empty for loaded dictionaries).
  std::vector<double> divergence_trace;

  int num_atoms() const { return static_cast<int>(atoms.cols()); }
  int num_bins() const { return static_cast<int>(atoms.rows()); }
};

struct Activation {
  Eigen::VectorXd v;  // K entries, >= kActivationFloor
};

// Itakura-Saito divergence sum_{m,n} [p/q - log(p/q) - 1]; zero iff p == q.
// Throws if any model entry is <= 0.
double is_divergence(const Eigen::MatrixXd& power, const Eigen::MatrixXd& model);

// One multiplicative activation update
//   V <- V ∘ [ T' ((TV)^-2 ∘ P) / T' (TV)^-1 ]^(1/2), floored.
Eigen::MatrixXd mm_update_activations(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& act,
                                      const Eigen::MatrixXd& power);

// One multiplicative dictionary update, roles swapped, floored.
Eigen::MatrixXd mm_update_dictionary(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& act,
                                     const Eigen::MatrixXd& power);

struct TrainOptions {
  int num_atoms = 10;
  int iters = 200;
  double rel_tol = 1e-6;      // early stop on relative divergence improvement
  int checkpoint_every = 10;  // divergence_trace granularity
  std::uint64_t seed = 1;
};

// Alternates dictionary and activation updates on |S_tr|^2 from a seeded
// random-positive init; columns are normalized with the scale folded into
// the discarded activations.
NoiseDictionary train_dictionary(const TrainingMatrix& frames, int sample_rate,
                                 const TrainOptions& opts);

// mm_steps applications of the activation update with fixed atoms on a
// single-column target (half-spectrum, length M/2+1).
Activation infer_activations(const NoiseDictionary& dict, const Activation& init,
                             std::span<const double> target, int mm_steps);

// diag(T v) as a half-spectrum. mirror_real() yields the full length-M
// covariance diagonal when needed.
std::vector<double> synthesize_cov(const NoiseDictionary& dict, const Activation& act);

// FIFO store of R-length observation segments, capped in seconds.
class TrainingBuffer {
 public:
  TrainingBuffer(int block_shift, int sample_rate, double cap_seconds);

  void append(std::span<const double> y_block);
  std::size_t num_segments() const { return segments_.size(); }
  double duration_s() const;
  std::vector<double> concatenated() const;
  int block_shift() const { return block_shift_; }
  int sample_rate() const { return sample_rate_; }

 private:
  int block_shift_;
  int sample_rate_;
  std::size_t max_segments_;
  std::deque<std::vector<double>> segments_;
};

// Appends y_block iff the mean power of the trailing max(R, M/2) samples of
// x_block is below threshold (input inactive, so the observation is noise).
bool maybe_collect(TrainingBuffer& buffer, std::span<const double> x_block,
                   std::span<const double> y_block, double threshold);

// Convenience: dictionary training straight from a buffer (Hamming window,
// frame shift = block shift). Requires at least num_atoms STFT frames.
NoiseDictionary train_dictionary(const TrainingBuffer& buffer, int block_len,
                                 const TrainOptions& opts);

// Binary persistence; round-trips bit-exactly. Format documented in README.
void save_dictionary(const NoiseDictionary& dict, const std::string& path);
NoiseDictionary load_dictionary(const std::string& path);

}  // namespace ssfdaf

#endif  // SSFDAF_NOISEMODEL_HPP_
