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

#include "finedetail/flow.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "finedetail/error.h"
#include "json.hpp"

namespace finedetail::flow {
namespace {

// out[o] += sum_c sum_k w[o][c][k] * in[c][y + ky - 1][x + kx - 1], zero padded.
void Conv3x3Same(const TensorD& in, const double* w, std::size_t out_ch,
                 TensorD& out) {
  const std::size_t in_ch = in.channels(), h = in.height(), wd = in.width();
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t c = 0; c < in_ch; ++c) {
      const double* k = w + (o * in_ch + c) * 9;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double kv = k[ky * 3 + kx];
          if (kv == 0.0) continue;
          const std::size_t y_lo = ky == 0 ? 1 : 0;
          const std::size_t y_hi = ky == 2 ? h - 1 : h;
          const std::size_t x_lo = kx == 0 ? 1 : 0;
          const std::size_t x_hi = kx == 2 ? wd - 1 : wd;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            const double* src = in.row(c, y + ky - 1);
            double* dst = out.row(o, y);
            for (std::size_t x = x_lo; x < x_hi; ++x) {
              dst[x] += kv * src[x + kx - 1];
            }
          }
        }
      }
    }
  }
}

// dw[o][c][k] += sum_{y,x} g[o][y][x] * in[c][y + ky - 1][x + kx - 1]
// din[c][y + ky - 1][x + kx - 1] += w[o][c][k] * g[o][y][x]   (if din)
void Conv3x3SameBackward(const TensorD& in, const double* w, const TensorD& g,
                         double* dw, TensorD* din) {
  const std::size_t in_ch = in.channels(), out_ch = g.channels();
  const std::size_t h = in.height(), wd = in.width();
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t c = 0; c < in_ch; ++c) {
      const std::size_t base = (o * in_ch + c) * 9;
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::size_t y_lo = ky == 0 ? 1 : 0;
          const std::size_t y_hi = ky == 2 ? h - 1 : h;
          const std::size_t x_lo = kx == 0 ? 1 : 0;
          const std::size_t x_hi = kx == 2 ? wd - 1 : wd;
          const double kv = w[base + ky * 3 + kx];
          double acc = 0.0;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            const double* src = in.row(c, y + ky - 1);
            const double* gr = g.row(o, y);
            double* di = din ? din->row(c, y + ky - 1) : nullptr;
            for (std::size_t x = x_lo; x < x_hi; ++x) {
              acc += gr[x] * src[x + kx - 1];
              if (di) di[x + kx - 1] += kv * gr[x];
            }
          }
          dw[base + ky * 3 + kx] += acc;
        }
      }
    }
  }
}

void RequireSameShape(const TensorD& a, const TensorD& b) {
  FD_REQUIRE(a.shape() == b.shape(), "shape mismatch " + ToString(a.shape()) +
                                         " vs " + ToString(b.shape()));
}

}  // namespace

Schedule Schedule::RectifiedFlow() {
  return {[](double t) { return 1.0 - t; }, [](double t) { return t; }};
}

TensorD ForwardDiffuse(const TensorD& x0, const TensorD& eps, double t,
                       const Schedule& schedule) {
  RequireSameShape(x0, eps);
  FD_REQUIRE(t >= 0.0 && t <= 1.0, "t must lie in [0, 1], got " + std::to_string(t));
  const double a = schedule.alpha(t), s = schedule.sigma(t);
  TensorD z(x0.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x0[i] + s * eps[i];
  return z;
}

TensorD Target(Objective objective, const TensorD& x0, const TensorD& eps) {
  RequireSameShape(x0, eps);
  if (objective == Objective::kNoise) return eps;
  TensorD v(x0.shape());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = eps[i] - x0[i];
  return v;
}

double LossWeight(WeightMode mode, double t, const Schedule& schedule) {
  if (mode == WeightMode::kConstant) return 1.0;
  const double s = schedule.sigma(t);
  return s * s;
}

// ---------------------------------------------------------------------------

DenoiserModel::DenoiserModel(std::size_t channels, std::size_t hidden)
    : channels_(channels), hidden_(hidden),
      params_(ParamCount(channels, hidden), 0.0) {
  FD_REQUIRE(channels > 0 && hidden > 0, "channels and hidden must be positive");
}

std::size_t DenoiserModel::ParamCount(std::size_t channels, std::size_t hidden) {
  return hidden * channels * 9 + hidden + hidden * kTimeFeatures +
         channels * hidden * 9 + channels;
}

std::array<double, DenoiserModel::kTimeFeatures> DenoiserModel::TimeFeatures(
    double t) {
  const double pi = std::numbers::pi;
  return {std::sin(pi * t), std::cos(pi * t), std::sin(2 * pi * t),
          std::cos(2 * pi * t)};
}

void DenoiserModel::InitRandom(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::fill(params_.begin(), params_.end(), 0.0);
  std::normal_distribution<double> n1(0.0, scale / std::sqrt(9.0 * channels_));
  for (std::size_t i = 0; i < b1_offset(); ++i) params_[w1_offset() + i] = n1(rng);
  std::normal_distribution<double> n2(0.0, scale / std::sqrt(9.0 * hidden_));
  for (std::size_t i = w2_offset(); i < b2_offset(); ++i) params_[i] = n2(rng);
}

TensorD DenoiserModel::Forward(const TensorD& z, double t,
                               Activations* acts) const {
  FD_REQUIRE(z.channels() == channels_,
             "model expects " + std::to_string(channels_) + " channels, got " +
                 std::to_string(z.channels()));
  FD_REQUIRE(z.height() > 0 && z.width() > 0, "empty input");
  const auto phi = TimeFeatures(t);
  const std::size_t h = z.height(), w = z.width();

  TensorD a1(hidden_, h, w);
  for (std::size_t k = 0; k < hidden_; ++k) {
    double bias = params_[b1_offset() + k];
    for (std::size_t f = 0; f < kTimeFeatures; ++f) {
      bias += params_[emb_offset() + k * kTimeFeatures + f] * phi[f];
    }
    std::fill(a1.row(k, 0), a1.row(k, 0) + h * w, bias);
  }
  Conv3x3Same(z, params_.data() + w1_offset(), hidden_, a1);
  for (double& v : a1.data()) v = std::tanh(v);

  TensorD out(channels_, h, w);
  for (std::size_t o = 0; o < channels_; ++o) {
    std::fill(out.row(o, 0), out.row(o, 0) + h * w, params_[b2_offset() + o]);
  }
  Conv3x3Same(a1, params_.data() + w2_offset(), channels_, out);

  if (acts) {
    acts->input = z;
    acts->hidden = std::move(a1);
    acts->phi = phi;
  }
  return out;
}

void DenoiserModel::Backward(const Activations& acts, const TensorD& grad_out,
                             std::span<double> grad) const {
  FD_REQUIRE(grad.size() == params_.size(), "gradient buffer has wrong size");
  FD_REQUIRE(grad_out.channels() == channels_ &&
                 grad_out.height() == acts.hidden.height() &&
                 grad_out.width() == acts.hidden.width(),
             "grad_out shape does not match the forward pass");
  double* g = grad.data();

  for (std::size_t o = 0; o < channels_; ++o) {
    double acc = 0.0;
    for (double v : std::span<const double>(grad_out.row(o, 0),
                                            grad_out.height() * grad_out.width())) {
      acc += v;
    }
    g[b2_offset() + o] += acc;
  }
  TensorD dh(acts.hidden.shape());
  Conv3x3SameBackward(acts.hidden, params_.data() + w2_offset(), grad_out,
                      g + w2_offset(), &dh);

  // through tanh
  for (std::size_t i = 0; i < dh.size(); ++i) {
    const double y = acts.hidden[i];
    dh[i] *= 1.0 - y * y;
  }
  const std::size_t plane = dh.height() * dh.width();
  for (std::size_t k = 0; k < hidden_; ++k) {
    double acc = 0.0;
    for (double v : std::span<const double>(dh.row(k, 0), plane)) acc += v;
    g[b1_offset() + k] += acc;
    for (std::size_t f = 0; f < kTimeFeatures; ++f) {
      g[emb_offset() + k * kTimeFeatures + f] += acc * acts.phi[f];
    }
  }
  Conv3x3SameBackward(acts.input, params_.data() + w1_offset(), dh,
                      g + w1_offset(), nullptr);
}

FlatBlob DenoiserModel::ToBlob() const {
  FlatBlob blob;
  blob.header = {static_cast<std::uint32_t>(channels_),
                 static_cast<std::uint32_t>(hidden_),
                 static_cast<std::uint32_t>(kTimeFeatures)};
  blob.values.assign(params_.begin(), params_.end());
  return blob;
}

DenoiserModel DenoiserModel::FromBlob(const FlatBlob& blob) {
  if (blob.header.size() != 3 || blob.header[2] != kTimeFeatures) {
    throw DecodeError("model blob: header must be (channels, hidden, 4)");
  }
  DenoiserModel m(blob.header[0], blob.header[1]);
  if (blob.values.size() != m.params_.size()) {
    throw DecodeError("model blob: expected " + std::to_string(m.params_.size()) +
                      " values, got " + std::to_string(blob.values.size()));
  }
  std::copy(blob.values.begin(), blob.values.end(), m.params_.begin());
  return m;
}

// ---------------------------------------------------------------------------

void TrainConfig::Validate() const {
  band_weights.Validate();
  FD_REQUIRE(steps >= 1, "steps must be at least 1");
  FD_REQUIRE(batch > 0, "batch must be positive");
  FD_REQUIRE(eval_batch > 0, "eval_batch must be positive");
  FD_REQUIRE(log_every > 0, "log_every must be positive");
  FD_REQUIRE(std::isfinite(learning_rate) && learning_rate > 0.0,
             "learning rate must be positive");
  FD_REQUIRE(channels > 0 && hidden > 0, "channels and hidden must be positive");
  FD_REQUIRE(size >= 2 && size % 2 == 0, "size must be even and at least 2");
}

LossAndGradient LossAndGrad(const DenoiserModel& model,
                            std::span<const Sample> batch,
                            const TrainConfig& cfg, std::ptrdiff_t step,
                            bool want_grad) {
  FD_REQUIRE(!batch.empty(), "empty batch");
  const Schedule schedule = Schedule::RectifiedFlow();
  LossAndGradient out;
  if (want_grad) out.grad.assign(model.params().size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  DenoiserModel::Activations acts;
  TensorD g;
  for (const Sample& s : batch) {
    const TensorD z = ForwardDiffuse(s.x0, s.eps, s.t, schedule);
    const TensorD target = Target(cfg.objective, s.x0, s.eps);
    const TensorD pred = model.Forward(z, s.t, want_grad ? &acts : nullptr);
    if (!pred.AllFinite()) {
      throw NumericFailure("non-finite model output", step);
    }
    const double w_t = LossWeight(cfg.weight_mode, s.t, schedule);

    double loss = 0.0;
    if (cfg.loss_path == LossPath::kWavelet) {
      loss = WlfLossAndGrad(pred, target, cfg.band_weights, w_t, cfg.reduction, &g);
    } else {
      FD_REQUIRE(cfg.band_weights.IsUnit(),
                 "the plain loss path only supports unit band weights");
      loss = w_t * SquaredError(pred, target, cfg.reduction);
      g = TensorD(pred.shape());
      const double scale =
          2.0 * w_t /
          (cfg.reduction == Reduction::kMean ? static_cast<double>(pred.size()) : 1.0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (pred[i] - target[i]);
    }
    if (!std::isfinite(loss)) throw NumericFailure("non-finite loss", step);
    out.loss += loss * inv_b;

    const BandEnergies e = BandResidualEnergy(pred, target);
    for (int b = 0; b < 4; ++b) out.residual.e[b] += e.e[b] * inv_b;

    if (want_grad) {
      for (double& v : g.data()) v *= inv_b;
      model.Backward(acts, g, out.grad);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

SyntheticDataset::SyntheticDataset(std::size_t channels, std::size_t height,
                                   std::size_t width, std::uint64_t seed)
    : channels_(channels), height_(height), width_(width), rng_(seed) {
  FD_REQUIRE(channels > 0 && height > 0 && width > 0, "empty dataset shape");
}

TensorD SyntheticDataset::Next() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> cell_pick(0, 2);
  std::normal_distribution<double> n(0.0, 1.0);
  TensorD x(channels_, height_, width_);
  const std::size_t h = height_, w = width_;
  for (std::size_t c = 0; c < channels_; ++c) {
    const double gy = 0.5 * u(rng_), gx = 0.5 * u(rng_), off = 0.3 * u(rng_);
    const std::size_t cell = std::size_t{1} << cell_pick(rng_);
    const double checker = 0.4 * u(rng_);
    const double noise_amp = 0.3 * (u(rng_) + 1.0) * 0.5;

    std::vector<double> noise(h * w);
    for (double& v : noise) v = n(rng_);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t xx = 0; xx < w; ++xx) {
        double acc = 0.0;
        int cnt = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y) + dy;
            const std::ptrdiff_t xs = static_cast<std::ptrdiff_t>(xx) + dx;
            if (yy < 0 || xs < 0 || yy >= static_cast<std::ptrdiff_t>(h) ||
                xs >= static_cast<std::ptrdiff_t>(w)) {
              continue;
            }
            acc += noise[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xs)];
            ++cnt;
          }
        }
        const double fy = h > 1 ? 2.0 * y / (h - 1) - 1.0 : 0.0;
        const double fx = w > 1 ? 2.0 * xx / (w - 1) - 1.0 : 0.0;
        const double sign = ((y / cell + xx / cell) % 2 == 0) ? 1.0 : -1.0;
        const double v =
            off + gy * fy + gx * fx + checker * sign + noise_amp * acc / cnt;
        x.at(c, y, xx) = std::clamp(v, -1.0, 1.0);
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Sample> DrawBatch(SyntheticDataset& data, std::mt19937_64& rng,
                              int count) {
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Sample> batch;
  batch.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Sample s;
    s.x0 = data.Next();
    s.eps = TensorD(s.x0.shape());
    for (double& v : s.eps.data()) v = n(rng);
    s.t = ut(rng);
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace

TrainReport Train(const TrainConfig& cfg, SyntheticDataset& data) {
  cfg.Validate();
  DenoiserModel model(cfg.channels, cfg.hidden);
  model.InitRandom(cfg.seed ^ 0x9e3779b97f4a7c15ull, cfg.init_scale);
  std::mt19937_64 rng(cfg.seed + 1);
  // Held-out batch, fixed for the whole run.
  std::mt19937_64 eval_rng(cfg.seed + 2);
  const std::vector<Sample> eval = DrawBatch(data, eval_rng, cfg.eval_batch);

  TrainReport report;
  report.channels = cfg.channels;
  report.hidden = cfg.hidden;

  auto log = [&](int step, double train_loss) {
    const LossAndGradient e = LossAndGrad(model, eval, cfg, step, false);
    report.curve.push_back({step, train_loss, e.loss, e.residual});
    return e.loss;
  };

  for (int step = 0; step < cfg.steps; ++step) {
    const std::vector<Sample> batch = DrawBatch(data, rng, cfg.batch);
    const LossAndGradient lg = LossAndGrad(model, batch, cfg, step);
    if (step == 0) report.initial_loss = log(0, lg.loss);
    else if (step % cfg.log_every == 0) log(step, lg.loss);

    auto p = model.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= cfg.learning_rate * lg.grad[i];
      if (!std::isfinite(p[i])) throw NumericFailure("parameter diverged", step);
    }
  }
  const std::vector<Sample> batch = DrawBatch(data, rng, cfg.batch);
  const double last = LossAndGrad(model, batch, cfg, cfg.steps, false).loss;
  report.final_loss = log(cfg.steps, last);
  report.final_params.assign(model.params().begin(), model.params().end());
  return report;
}

TrainReport Train(const TrainConfig& cfg) {
  SyntheticDataset data(cfg.channels, cfg.size, cfg.size, cfg.seed);
  return Train(cfg, data);
}

std::string TrainReport::ToJson() const {
  nlohmann::ordered_json j;
  j["initial_loss"] = initial_loss;
  j["final_loss"] = final_loss;
  j["channels"] = channels;
  j["hidden"] = hidden;
  nlohmann::ordered_json curve_json = nlohmann::ordered_json::array();
  for (const TrainRecord& r : curve) {
    nlohmann::ordered_json row;
    row["step"] = r.step;
    row["train_loss"] = r.train_loss;
    row["eval_loss"] = r.eval_loss;
    for (int b = 0; b < 4; ++b) row[std::string("e_") + kBandNames[b]] = r.residual.e[b];
    curve_json.push_back(std::move(row));
  }
  j["curve"] = std::move(curve_json);
  return j.dump(2);
}

}  // namespace finedetail::flow
