// Copyright 2026 The finedetail Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Desk-scale diffusion training lab.
//
// Data x0 is mixed with Gaussian noise eps along z_t = alpha(t) x0 +
// sigma(t) eps. A small conv net predicts either the velocity eps - x0
// (rectified flow, alpha = 1 - t, sigma = t) or the noise eps, and is trained
// by plain gradient descent on the wavelet loss
//
//   w_t * sum_b lambda_b || dwt(model(z_t, t))_b - dwt(target)_b ||^2
//
// with gradients from hand-written backpropagation. The same loss can be
// computed without the transform (LossPath::kPlain); at unit band weights
// the two agree to rounding error.

#ifndef FINEDETAIL_FLOW_H_
#define FINEDETAIL_FLOW_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "finedetail/blob.h"
#include "finedetail/tensor.h"
#include "finedetail/wavelet.h"

namespace finedetail::flow {

struct Schedule {
  std::function<double(double)> alpha;
  std::function<double(double)> sigma;

  // alpha(t) = 1 - t, sigma(t) = t.
  static Schedule RectifiedFlow();
};

enum class Objective { kVelocity, kNoise };
enum class WeightMode { kConstant, kSigmaSquared };
enum class LossPath { kWavelet, kPlain };

// z = alpha(t) x0 + sigma(t) eps. Requires t in [0, 1].
TensorD ForwardDiffuse(const TensorD& x0, const TensorD& eps, double t,
                       const Schedule& schedule);

// velocity: eps - x0; noise: eps.
TensorD Target(Objective objective, const TensorD& x0, const TensorD& eps);

double LossWeight(WeightMode mode, double t, const Schedule& schedule);

// conv3x3(C -> hidden) + b1 + E phi(t) -> tanh -> conv3x3(hidden -> C) + b2,
// zero padding 1. phi(t) = (sin pi t, cos pi t, sin 2 pi t, cos 2 pi t).
class DenoiserModel {
 public:
  static constexpr std::size_t kTimeFeatures = 4;

  DenoiserModel(std::size_t channels, std::size_t hidden);

  static std::size_t ParamCount(std::size_t channels, std::size_t hidden);
  static std::array<double, kTimeFeatures> TimeFeatures(double t);

  std::size_t channels() const { return channels_; }
  std::size_t hidden() const { return hidden_; }

  // Flat layout: W1 (hidden, C, 3, 3) | b1 (hidden) | E (hidden, 4) |
  //              W2 (C, hidden, 3, 3) | b2 (C)
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // N(0, scale^2 / fan_in) weights, zero biases and embedding.
  void InitRandom(std::uint64_t seed, double scale = 1.0);

  struct Activations {
    TensorD input;
    TensorD hidden;  // tanh output
    std::array<double, kTimeFeatures> phi{};
  };

  TensorD Forward(const TensorD& z, double t, Activations* acts = nullptr) const;

  // Accumulates d loss / d params into grad (same layout as params()).
  void Backward(const Activations& acts, const TensorD& grad_out,
                std::span<double> grad) const;

  FlatBlob ToBlob() const;
  static DenoiserModel FromBlob(const FlatBlob& blob);

 private:
  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return hidden_ * channels_ * 9; }
  std::size_t emb_offset() const { return b1_offset() + hidden_; }
  std::size_t w2_offset() const { return emb_offset() + hidden_ * kTimeFeatures; }
  std::size_t b2_offset() const { return w2_offset() + channels_ * hidden_ * 9; }

  std::size_t channels_;
  std::size_t hidden_;
  std::vector<double> params_;
};

struct Sample {
  TensorD x0;
  TensorD eps;
  double t = 0.0;
};

struct TrainConfig {
  Objective objective = Objective::kVelocity;
  BandWeights band_weights;
  WeightMode weight_mode = WeightMode::kConstant;
  LossPath loss_path = LossPath::kWavelet;
  Reduction reduction = Reduction::kMean;
  int steps = 500;
  int batch = 8;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  std::size_t channels = 2;
  std::size_t size = 16;       // height = width
  std::size_t hidden = 16;
  double init_scale = 1.0;
  int log_every = 10;
  int eval_batch = 32;

  void Validate() const;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
  BandEnergies residual;  // batch mean of ||dwt(pred - target)_b||^2
};

// Batch mean of the per-sample loss and its gradient. Throws NumericFailure
// (carrying `step`) when the forward pass produces a non-finite value.
LossAndGradient LossAndGrad(const DenoiserModel& model,
                            std::span<const Sample> batch,
                            const TrainConfig& cfg, std::ptrdiff_t step = -1,
                            bool want_grad = true);

// Seeded generator of (C, H, W) textures in [-1, 1]: a smooth linear ramp,
// a checkerboard with cell size 1, 2 or 4 and box-filtered noise.
class SyntheticDataset {
 public:
  SyntheticDataset(std::size_t channels, std::size_t height, std::size_t width,
                   std::uint64_t seed);
  TensorD Next();

 private:
  std::size_t channels_, height_, width_;
  std::mt19937_64 rng_;
};

struct TrainRecord {
  int step = 0;
  double train_loss = 0.0;  // loss on that step's training batch
  double eval_loss = 0.0;   // loss on the fixed evaluation batch
  BandEnergies residual;    // evaluation-batch per-band residual energy
};

struct TrainReport {
  std::vector<TrainRecord> curve;
  double initial_loss = 0.0;  // evaluation loss before the first update
  double final_loss = 0.0;    // evaluation loss after the last update
  std::vector<double> final_params;
  std::size_t channels = 0, hidden = 0;

  std::string ToJson() const;
};

TrainReport Train(const TrainConfig& cfg, SyntheticDataset& data);

// Convenience: dataset seeded from cfg.seed.
TrainReport Train(const TrainConfig& cfg);

}  // namespace finedetail::flow

#endif  // FINEDETAIL_FLOW_H_
