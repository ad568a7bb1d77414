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

#include "noisemodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace ssfdaf {

double is_divergence(const Eigen::MatrixXd& power, const Eigen::MatrixXd& model) {
  if (power.rows() != model.rows() || power.cols() != model.cols())
    throw std::invalid_argument("is_divergence: shape mismatch");
  if ((model.array() <= 0.0).any())
    throw std::invalid_argument("is_divergence: model entries must be positive");
  const Eigen::ArrayXXd ratio = power.array() / model.array();
  return (ratio - ratio.log() - 1.0).sum();
}

Eigen::MatrixXd mm_update_activations(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& act,
                                      const Eigen::MatrixXd& power) {
  const Eigen::ArrayXXd model = (atoms * act).array();
  const Eigen::MatrixXd num = atoms.transpose() * (power.array() / (model * model)).matrix();
  const Eigen::MatrixXd den = atoms.transpose() * model.inverse().matrix();
  Eigen::MatrixXd out =
      (act.array() * (num.array() / den.array()).sqrt()).cwiseMax(kActivationFloor);
  return out;
}

Eigen::MatrixXd mm_update_dictionary(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& act,
                                     const Eigen::MatrixXd& power) {
  const Eigen::ArrayXXd model = (atoms * act).array();
  const Eigen::MatrixXd num = (power.array() / (model * model)).matrix() * act.transpose();
  const Eigen::MatrixXd den = model.inverse().matrix() * act.transpose();
  Eigen::MatrixXd out = (atoms.array() * (num.array() / den.array()).sqrt()).cwiseMax(kAtomFloor);
  return out;
}

NoiseDictionary train_dictionary(const TrainingMatrix& frames, int sample_rate,
                                 const TrainOptions& opts) {
  const int bins = static_cast<int>(frames.spectra.rows());
  const int n = frames.num_frames();
  if (opts.num_atoms < 1) throw std::invalid_argument("train_dictionary: need at least one atom");
  if (n < opts.num_atoms)
    throw std::invalid_argument("train_dictionary: fewer training frames than atoms");

  Eigen::MatrixXd power = frames.spectra.cwiseAbs2().cwiseMax(kPowerFloor);
  const double scale = power.mean();

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.1, 1.1);
  Eigen::MatrixXd atoms(bins, opts.num_atoms);
  Eigen::MatrixXd act(opts.num_atoms, n);
  for (int k = 0; k < opts.num_atoms; ++k)
    for (int m = 0; m < bins; ++m) atoms(m, k) = unit(rng) * scale;
  for (int k = 0; k < opts.num_atoms; ++k)
    for (int t = 0; t < n; ++t) act(k, t) = unit(rng);

  NoiseDictionary dict;
  dict.block_len = frames.block_len;
  dict.sample_rate = sample_rate;
  dict.frame_shift = frames.frame_shift;

  double prev = is_divergence(power, atoms * act);
  dict.divergence_trace.push_back(prev);
  for (int it = 1; it <= opts.iters; ++it) {
    atoms = mm_update_dictionary(atoms, act, power);
    act = mm_update_activations(atoms, act, power);
    if (it % opts.checkpoint_every == 0 || it == opts.iters) {
      const double cur = is_divergence(power, atoms * act);
      dict.divergence_trace.push_back(cur);
      if (prev > 0.0 && (prev - cur) / std::max(prev, 1e-300) < opts.rel_tol) break;
      prev = cur;
    }
  }

  // Resolve the (T, V) scaling ambiguity: max entry of each column equals the
  // training power scale. The compensating factor lands in the discarded V.
  for (int k = 0; k < opts.num_atoms; ++k) {
    const double mx = atoms.col(k).maxCoeff();
    if (mx > 0.0) atoms.col(k) *= scale / mx;
  }
  dict.atoms = atoms.cwiseMax(kAtomFloor);
  return dict;
}

Activation infer_activations(const NoiseDictionary& dict, const Activation& init,
                             std::span<const double> target, int mm_steps) {
  if (mm_steps < 1) throw std::invalid_argument("infer_activations: mm_steps must be >= 1");
  if (static_cast<int>(target.size()) != dict.num_bins())
    throw std::invalid_argument("infer_activations: target size mismatch");
  if (init.v.size() != dict.num_atoms())
    throw std::invalid_argument("infer_activations: activation size mismatch");

  Eigen::MatrixXd tgt(dict.num_bins(), 1);
  for (int m = 0; m < dict.num_bins(); ++m)
    tgt(m, 0) = std::max(target[static_cast<size_t>(m)], kPowerFloor);

  Eigen::MatrixXd v = init.v;
  for (int p = 0; p < mm_steps; ++p) v = mm_update_activations(dict.atoms, v, tgt);
  Activation out;
  out.v = v.col(0);
  return out;
}

std::vector<double> synthesize_cov(const NoiseDictionary& dict, const Activation& act) {
  if (act.v.size() != dict.num_atoms())
    throw std::invalid_argument("synthesize_cov: activation size mismatch");
  const Eigen::VectorXd cov = dict.atoms * act.v;
  return {cov.data(), cov.data() + cov.size()};
}

TrainingBuffer::TrainingBuffer(int block_shift, int sample_rate, double cap_seconds)
    : block_shift_(block_shift), sample_rate_(sample_rate) {
  if (block_shift < 1 || sample_rate < 1 || cap_seconds <= 0.0)
    throw std::invalid_argument("TrainingBuffer: invalid parameters");
  max_segments_ = static_cast<std::size_t>(
      std::max(1.0, std::floor(cap_seconds * sample_rate / block_shift)));
}

void TrainingBuffer::append(std::span<const double> y_block) {
  if (static_cast<int>(y_block.size()) != block_shift_)
    throw std::invalid_argument("TrainingBuffer::append: segment length mismatch");
  segments_.emplace_back(y_block.begin(), y_block.end());
  while (segments_.size() > max_segments_) segments_.pop_front();
}

double TrainingBuffer::duration_s() const {
  return static_cast<double>(segments_.size()) * block_shift_ / sample_rate_;
}

std::vector<double> TrainingBuffer::concatenated() const {
  std::vector<double> out;
  out.reserve(segments_.size() * static_cast<std::size_t>(block_shift_));
  for (const auto& seg : segments_) out.insert(out.end(), seg.begin(), seg.end());
  return out;
}

bool maybe_collect(TrainingBuffer& buffer, std::span<const double> x_block,
                   std::span<const double> y_block, double threshold) {
  const std::size_t tail =
      std::min(x_block.size(),
               static_cast<std::size_t>(std::max(buffer.block_shift(),
                                                 static_cast<int>(x_block.size()) / 2)));
  double power = 0.0;
  for (std::size_t i = x_block.size() - tail; i < x_block.size(); ++i)
    power += x_block[i] * x_block[i];
  power /= static_cast<double>(tail);
  if (power >= threshold) return false;
  buffer.append(y_block);
  return true;
}

NoiseDictionary train_dictionary(const TrainingBuffer& buffer, int block_len,
                                 const TrainOptions& opts) {
  const std::vector<double> signal = buffer.concatenated();
  if (static_cast<int>(signal.size()) < block_len)
    throw std::invalid_argument("train_dictionary: buffer shorter than one frame");
  Dft dft(block_len);
  const std::vector<double> window = hamming_window(block_len);
  TrainingMatrix frames = stft_training(dft, signal, buffer.block_shift(), window);
  return train_dictionary(frames, buffer.sample_rate(), opts);
}

namespace {

constexpr char kDictMagic[8] = {'S', 'S', 'N', 'D', 'I', 'C', '0', '1'};

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_dictionary(const NoiseDictionary& dict, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_dictionary: cannot open " + tmp);
    f.write(kDictMagic, sizeof kDictMagic);
    write_u32(f, static_cast<std::uint32_t>(dict.block_len));
    write_u32(f, static_cast<std::uint32_t>(dict.num_atoms()));
    write_u32(f, static_cast<std::uint32_t>(dict.sample_rate));
    write_u32(f, static_cast<std::uint32_t>(dict.frame_shift));
    write_u32(f, static_cast<std::uint32_t>(dict.window));
    write_u32(f, 0);  // reserved
    f.write(reinterpret_cast<const char*>(dict.atoms.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(dict.atoms.size())));
    if (!f) throw std::runtime_error("save_dictionary: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

NoiseDictionary load_dictionary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_dictionary: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kDictMagic, sizeof magic) != 0)
    throw std::runtime_error("load_dictionary: bad magic in " + path);
  NoiseDictionary dict;
  dict.block_len = static_cast<int>(read_u32(f));
  const int k = static_cast<int>(read_u32(f));
  dict.sample_rate = static_cast<int>(read_u32(f));
  dict.frame_shift = static_cast<int>(read_u32(f));
  dict.window = static_cast<WindowKind>(read_u32(f));
  read_u32(f);  // reserved
  if (dict.block_len < 2 || dict.block_len % 2 != 0 || k < 1)
    throw std::runtime_error("load_dictionary: corrupt header in " + path);
  dict.atoms.resize(dict.block_len / 2 + 1, k);
  f.read(reinterpret_cast<char*>(dict.atoms.data()),
         static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(dict.atoms.size())));
  if (!f) throw std::runtime_error("load_dictionary: truncated file " + path);
  return dict;
}

}  // namespace ssfdaf
