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

#include <cmath>
#include <random>

#include "finedetail/blob.h"
#include "finedetail/error.h"
#include "gtest/gtest.h"
#include "test_support.h"

namespace finedetail::flow {
namespace {

using finedetail::testing::CheckGradient;
using finedetail::testing::RandomBatch;
using finedetail::testing::RandomModel;

TensorD Random(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w) {
  std::normal_distribution<double> n(0.0, 1.0);
  TensorD t(c, h, w);
  for (double& v : t.data()) v = n(rng);
  return t;
}

TEST(ScheduleTest, RectifiedFlowEndpoints) {
  const Schedule s = Schedule::RectifiedFlow();
  EXPECT_EQ(s.alpha(0.0), 1.0);
  EXPECT_EQ(s.sigma(0.0), 0.0);
  EXPECT_EQ(s.alpha(1.0), 0.0);
  EXPECT_EQ(s.sigma(1.0), 1.0);
}

TEST(ForwardDiffuseTest, Examples) {
  std::mt19937_64 rng(1);
  const TensorD x0 = Random(rng, 2, 4, 4), eps = Random(rng, 2, 4, 4);
  const Schedule s = Schedule::RectifiedFlow();
  EXPECT_EQ(ForwardDiffuse(x0, eps, 0.0, s), x0);
  EXPECT_EQ(ForwardDiffuse(x0, eps, 1.0, s), eps);
  const TensorD z = ForwardDiffuse(x0, eps, 0.5, s);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_DOUBLE_EQ(z[i], 0.5 * x0[i] + 0.5 * eps[i]);
  EXPECT_THROW(ForwardDiffuse(x0, eps, 1.5, s), ContractViolation);
  EXPECT_THROW(ForwardDiffuse(x0, TensorD(2, 4, 2), 0.5, s), ContractViolation);
}

TEST(TargetTest, Objectives) {
  std::mt19937_64 rng(2);
  const TensorD x0 = Random(rng, 1, 4, 4), eps = Random(rng, 1, 4, 4);
  EXPECT_EQ(Target(Objective::kNoise, x0, eps), eps);
  const TensorD v = Target(Objective::kVelocity, x0, eps);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], eps[i] - x0[i]);
  const TensorD same = Target(Objective::kVelocity, eps, eps);
  for (double x : same.data()) EXPECT_EQ(x, 0.0);
  const TensorD zero(1, 4, 4);
  EXPECT_EQ(Target(Objective::kVelocity, zero, eps), Target(Objective::kNoise, x0, eps));
}

TEST(LossWeightTest, Modes) {
  const Schedule s = Schedule::RectifiedFlow();
  EXPECT_EQ(LossWeight(WeightMode::kConstant, 0.3, s), 1.0);
  EXPECT_DOUBLE_EQ(LossWeight(WeightMode::kSigmaSquared, 0.3, s), 0.09);
}

TEST(DenoiserTest, ParamCountAndShape) {
  EXPECT_EQ(DenoiserModel::ParamCount(2, 4), 4u * 2 * 9 + 4 + 4 * 4 + 2 * 4 * 9 + 2);
  const DenoiserModel m = RandomModel(3, 3, 5);
  EXPECT_EQ(m.params().size(), DenoiserModel::ParamCount(3, 5));
  std::mt19937_64 rng(3);
  EXPECT_EQ(m.Forward(Random(rng, 3, 6, 10), 0.2).shape(), (Shape3{3, 6, 10}));
  EXPECT_THROW(m.Forward(Random(rng, 2, 6, 10), 0.2), ContractViolation);
}

TEST(DenoiserTest, ZeroModelLossIsTargetEnergy) {
  const DenoiserModel m(2, 4);
  const auto batch = RandomBatch(4, 2, 8, 3);
  TrainConfig cfg;
  cfg.band_weights = BandWeights::Emphasis();
  const LossAndGradient lg = LossAndGrad(m, batch, cfg);
  double expected = 0.0;
  for (const Sample& s : batch) {
    expected += WlfLoss(TensorD(2, 8, 8), Target(cfg.objective, s.x0, s.eps),
                        cfg.band_weights, 1.0, cfg.reduction) / 3.0;
  }
  EXPECT_NEAR(lg.loss, expected, 1e-12);
}

TEST(DenoiserTest, BlobRoundTrip) {
  const DenoiserModel m = RandomModel(5, 2, 3);
  const DenoiserModel back = DenoiserModel::FromBlob(DecodeBlob(EncodeBlob(m.ToBlob())));
  ASSERT_EQ(back.params().size(), m.params().size());
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    EXPECT_EQ(back.params()[i], static_cast<double>(static_cast<float>(m.params()[i])));
  }
  FlatBlob bad = m.ToBlob();
  bad.values.pop_back();
  EXPECT_THROW(DenoiserModel::FromBlob(bad), DecodeError);
}

struct GradCase {
  Objective objective;
  BandWeights weights;
  WeightMode mode;
  Reduction reduction;
  std::size_t hidden;
};

TEST(GradientTest, MatchesCentralDifferences) {
  const GradCase cases[] = {
      {Objective::kVelocity, BandWeights::Unit(), WeightMode::kConstant, Reduction::kMean, 3},
      {Objective::kVelocity, BandWeights::Emphasis(), WeightMode::kConstant, Reduction::kSum, 4},
      {Objective::kNoise, BandWeights::Unit(), WeightMode::kSigmaSquared, Reduction::kMean, 2},
      {Objective::kNoise, {0.5, 1.0, 3.0, 2.0}, WeightMode::kConstant, Reduction::kSum, 5},
  };
  std::uint64_t seed = 100;
  for (const GradCase& c : cases) {
    TrainConfig cfg;
    cfg.objective = c.objective;
    cfg.band_weights = c.weights;
    cfg.weight_mode = c.mode;
    cfg.reduction = c.reduction;
    const DenoiserModel m = RandomModel(seed, 2, c.hidden);
    const auto batch = RandomBatch(seed + 1, 2, 8, 2);
    const auto r = CheckGradient(m, batch, cfg);
    EXPECT_LE(r.max_rel_error, 1e-3) << "seed " << seed << " param " << r.worst_index
                                     << " analytic " << r.analytic << " numeric " << r.numeric;
    seed += 10;
  }
}

TEST(GradientTest, PlainPathGradientEqualsWaveletPath) {
  const DenoiserModel m = RandomModel(7, 2, 4);
  const auto batch = RandomBatch(8, 2, 8, 3);
  TrainConfig wcfg, pcfg;
  pcfg.loss_path = LossPath::kPlain;
  const auto w = LossAndGrad(m, batch, wcfg);
  const auto p = LossAndGrad(m, batch, pcfg);
  EXPECT_NEAR(w.loss, p.loss, 1e-12 * p.loss);
  for (std::size_t i = 0; i < w.grad.size(); ++i) EXPECT_NEAR(w.grad[i], p.grad[i], 1e-10);
  pcfg.band_weights = BandWeights::Emphasis();
  EXPECT_THROW(LossAndGrad(m, batch, pcfg), ContractViolation);
}

TEST(SyntheticDatasetTest, RangeAndDeterminism) {
  SyntheticDataset a(3, 16, 16, 42), b(3, 16, 16, 42);
  for (int i = 0; i < 20; ++i) {
    const TensorD x = a.Next();
    EXPECT_EQ(x, b.Next());
    for (double v : x.data()) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  SyntheticDataset c(3, 16, 16, 43);
  EXPECT_NE(c.Next(), SyntheticDataset(3, 16, 16, 42).Next());
}

TEST(TrainTest, DeterministicAndLossDrops) {
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.seed = 3;
  const TrainReport a = Train(cfg);
  const TrainReport b = Train(cfg);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  EXPECT_EQ(a.final_params, b.final_params);
  EXPECT_LT(a.final_loss, a.initial_loss);
  EXPECT_EQ(a.curve.front().step, 0);
  EXPECT_EQ(a.curve.back().step, 200);
  EXPECT_EQ(a.curve.size(), 21u);
  for (const TrainRecord& r : a.curve) {
    for (double e : r.residual.e) EXPECT_TRUE(std::isfinite(e));
  }
}

TEST(TrainTest, UnitWeightsTrackPlainLossEveryStep) {
  TrainConfig w;
  w.steps = 100;
  w.log_every = 1;
  w.seed = 9;
  TrainConfig p = w;
  p.loss_path = LossPath::kPlain;
  const TrainReport a = Train(w);
  const TrainReport b = Train(p);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_NEAR(a.curve[i].train_loss, b.curve[i].train_loss, 1e-9 * b.curve[i].train_loss) << i;
    EXPECT_NEAR(a.curve[i].eval_loss, b.curve[i].eval_loss, 1e-9 * b.curve[i].eval_loss) << i;
  }
}

TEST(TrainTest, EmphasisReachesTheGradient) {
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.seed = 11;
  const TrainReport unit = Train(cfg);
  cfg.band_weights = BandWeights::Emphasis();
  const TrainReport emph = Train(cfg);
  const auto& u = unit.curve.back().residual.e;
  const auto& e = emph.curve.back().residual.e;
  EXPECT_NE(u[3], e[3]);
  EXPECT_GT(std::abs(u[1] + u[2] + u[3] - (e[1] + e[2] + e[3])), 1e-6);
}

TEST(TrainTest, DivergenceReportsStep) {
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.learning_rate = 1e6;
  try {
    Train(cfg);
    FAIL() << "expected NumericFailure";
  } catch (const NumericFailure& e) {
    EXPECT_GE(e.step(), 0);
    EXPECT_LT(e.step(), 200);
  }
}

TEST(TrainTest, ConfigValidation) {
  TrainConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(Train(cfg), ContractViolation);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(Train(cfg), ContractViolation);
  cfg = {};
  cfg.size = 15;
  EXPECT_THROW(Train(cfg), ContractViolation);
}

TEST(TrainTest, JsonShape) {
  TrainConfig cfg;
  cfg.steps = 20;
  const std::string json = Train(cfg).ToJson();
  for (const char* key : {"\"curve\"", "\"step\"", "\"e_ll\"", "\"e_lh\"", "\"e_hl\"", "\"e_hh\"",
                          "\"initial_loss\"", "\"final_loss\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace finedetail::flow
