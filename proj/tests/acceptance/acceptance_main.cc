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

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "finedetail/bench.h"
#include "finedetail/conv_check.h"
#include "finedetail/detail_metrics.h"
#include "finedetail/flow.h"
#include "finedetail/image.h"
#include "finedetail/jpeg.h"
#include "finedetail/wavelet.h"
#include "test_support.h"

namespace finedetail {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

ImageU8 GrayFromLevels(const std::vector<int>& px, std::size_t w, std::size_t h,
                       int levels) {
  ImageU8 img(w, h, 1);
  for (std::size_t i = 0; i < px.size(); ++i) {
    img.data()[i] = static_cast<std::uint8_t>(px[i] * 256 / levels);
  }
  return img;
}

ImageU8 LoadShipped(std::uint64_t seed, const std::string& name) {
  return LoadImage(testing::CorpusDir(seed) / (name + ".png"));
}

TensorD RandomTensor(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w) {
  std::normal_distribution<double> n(0.0, 1.0);
  TensorD t(c, h, w);
  for (double& v : t.data()) v = n(rng);
  return t;
}

double SumSquares(const TensorD& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

Outcome GlcmOracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int mismatches = 0, compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> px(64);
    for (int& v : px) v = static_cast<int>(rng() & 1);
    GrayQuantized q{8, 8, 2, {}};
    for (int v : px) q.data.push_back(static_cast<std::uint8_t>(v));
    for (const GlcmOffset& off : GlcmConfig{}.Offsets()) {
      const GlcmMatrix m = ComputeGlcm(q, {0, 0, 8, 8}, off, false);
      ++compared;
      if (m.counts() != testing::BruteForceGlcm(px, 8, 8, 2, off.dy(), off.dx())) {
        ++mismatches;
      }
    }
  }
  const double s = Seconds(t0);
  return {mismatches == 0 && s < 1.0,
          Fmt("%d/%d matrices equal, %.3f s", compared - mismatches, compared, s)};
}

Outcome GlcmAnalytic() {
  const ImageU8 constant(128, 96, 3, std::vector<std::uint8_t>(128 * 96 * 3, 77));
  const double c = GlcmScore(constant).glcm_raw;
  std::vector<int> px(64 * 64);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = (i % 64) % 2 ? 1 : 0;
  GlcmConfig cfg;
  cfg.radii = {1};
  cfg.orientations = {0};
  cfg.symmetric = true;
  const double stripes = GlcmScore(GrayFromLevels(px, 64, 64, 2), cfg).glcm_raw;
  const double err = std::abs(stripes + std::log(2.0));
  return {c == 0.0 && err <= 1e-9,
          Fmt("constant %.17g, stripes (symmetric) %.12f, |err| %.2e", c, stripes, err)};
}

Outcome Parseval() {
  std::mt19937_64 rng(31);
  double worst_ratio = 0.0, worst_recon = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = 1 + rng() % 4;
    const std::size_t h = 2 * (1 + rng() % 32), w = 2 * (1 + rng() % 32);
    const TensorD x = RandomTensor(rng, c, h, w);
    const SubBands<double> b = DwtHaar(x);
    const double ratio =
        (SumSquares(b.ll) + SumSquares(b.lh) + SumSquares(b.hl) + SumSquares(b.hh)) /
        SumSquares(x);
    worst_ratio = std::max(worst_ratio, std::abs(ratio - 1.0));
    const TensorD back = IdwtHaar(b);
    for (std::size_t k = 0; k < x.size(); ++k) {
      worst_recon = std::max(worst_recon, std::abs(back[k] - x[k]));
    }
  }
  return {worst_ratio <= 1e-5 && worst_recon <= 1e-6,
          Fmt("max |ratio-1| %.2e, max recon err %.2e", worst_ratio, worst_recon)};
}

Outcome WlfIdentity() {
  std::mt19937_64 rng(41);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = 1 + rng() % 4;
    const std::size_t h = 2 * (1 + rng() % 16), w = 2 * (1 + rng() % 16);
    const TensorD a = RandomTensor(rng, c, h, w), b = RandomTensor(rng, c, h, w);
    const double wlf = WlfLoss(a, b, BandWeights::Unit(), 1.0);
    const double se = SquaredError(a, b);
    worst = std::max(worst, std::abs(wlf - se) / se);
  }
  return {worst <= 1e-5, Fmt("max relative diff %.2e over 100 pairs", worst)};
}

Outcome ConvEquivalence() {
  const auto t0 = Clock::now();
  const EquivalenceSummary tiled = CheckTiledUpsampleConv(200, 7);
  const EquivalenceSummary dual = CheckDilationDuality(100, 8);
  const double s = Seconds(t0);
  std::string d = Fmt("tiled %d/%d (err %.1e/%.1e), duality %d/%d (err %.1e/%.1e), %.2f s",
                      tiled.cases - tiled.failures, tiled.cases, tiled.max_err_single,
                      tiled.max_err_double, dual.cases - dual.failures, dual.cases,
                      dual.max_err_single, dual.max_err_double, s);
  if (!tiled.ok()) d += "; " + tiled.first_failure;
  if (!dual.ok()) d += "; " + dual.first_failure;
  return {tiled.ok() && dual.ok() && s < 30.0, d};
}

Outcome GradientCheck() {
  using namespace flow;
  const auto t0 = Clock::now();
  const BandWeights weights[] = {BandWeights::Unit(), BandWeights::Emphasis(),
                                 {0.5, 1.0, 3.0, 2.0}, {2.0, 0.25, 1.0, 4.0}};
  std::mt19937_64 rng(51);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    TrainConfig cfg;
    cfg.objective = i % 2 ? Objective::kNoise : Objective::kVelocity;
    cfg.band_weights = weights[i % 4];
    cfg.weight_mode = (i / 2) % 2 ? WeightMode::kSigmaSquared : WeightMode::kConstant;
    cfg.reduction = (i / 3) % 2 ? Reduction::kSum : Reduction::kMean;
    const std::size_t channels = 1 + rng() % 3, hidden = 2 + rng() % 5;
    const DenoiserModel m = testing::RandomModel(rng(), channels, hidden);
    const auto batch = testing::RandomBatch(rng(), channels, 8, 2);
    worst = std::max(worst, testing::CheckGradient(m, batch, cfg).max_rel_error);
  }
  const double s = Seconds(t0);
  return {worst <= 1e-3 && s < 60.0, Fmt("max rel err %.2e over 10 configs, %.2f s", worst, s)};
}

Outcome ToyTraining() {
  using namespace flow;
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.band_weights = BandWeights::Emphasis();
    const TrainReport r = Train(cfg);
    const double ratio = r.final_loss / r.initial_loss;
    bool finite = true;
    for (const TrainRecord& rec : r.curve) {
      for (double e : rec.residual.e) finite &= std::isfinite(e);
      finite &= std::isfinite(rec.train_loss) && std::isfinite(rec.eval_loss);
    }
    ok &= ratio <= 0.5 && finite;
    d << (seed ? " " : "final/initial ") << Fmt("%.3f", ratio);
    if (seed == 0) ok &= Train(cfg).ToJson() == r.ToJson();
  }
  d << ", rerun identical";
  return {ok, d.str()};
}

Outcome JpegStructure() {
  const ImageU8 photo = LoadImage(testing::PhotoDir() / "astronaut.png");
  const bool determinism = jpeg::EncodeBaseline(photo) == jpeg::EncodeBaseline(photo);
  const int q0 = jpeg::ScaleQuantTable(jpeg::LuminanceBaseTable(), 95).zigzag[0];
  const ImageU8 constant(64, 64, 3, std::vector<std::uint8_t>(64 * 64 * 3, 128));
  const std::size_t size = jpeg::EncodeBaseline(constant).size();
  const std::size_t limit = 64 * 64 * 3 / 100;
  double min_psnr = 1e9;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const std::string& name : testing::SmoothCorpusNames()) {
      const ImageU8 img = LoadShipped(seed, name);
      min_psnr = std::min(min_psnr, testing::Psnr(
                                        jpeg::DecodeBaseline(jpeg::EncodeBaseline(img)), img));
    }
  }
  return {determinism && q0 == 2 && size < limit && min_psnr >= 40.0,
          Fmt("deterministic %s, quant[0] %d, constant 64x64 %zu bytes (limit %zu), "
              "min PSNR %.2f dB",
              determinism ? "yes" : "no", q0, size, limit, min_psnr)};
}

Outcome CompressionOrdering() {
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double c = CompressionRatio(LoadShipped(seed, "constant"));
    const double g = CompressionRatio(LoadShipped(seed, "gradient"));
    const double n = CompressionRatio(LoadShipped(seed, "noise"));
    ok &= c > g && g > n;
    d << (seed ? "; " : "") << Fmt("seed %d: %.1f > %.2f > %.2f", static_cast<int>(seed), c, g, n);
  }
  return {ok, d.str()};
}

Outcome Correlation() {
  const std::vector<double> x = {1.0, 2.5, 3.0, 7.0, 11.0};
  std::vector<double> mono, anti, affine;
  for (double v : x) {
    mono.push_back(std::exp(v));
    anti.push_back(-v * v * v);
    affine.push_back(3.0 * v - 2.0);
  }
  const double s1 = Srcc({x, mono}), s2 = Srcc({x, anti}), p3 = Plcc({x, affine});
  const auto ranks = FractionalRanks({1, 2, 2, 3});
  const bool ties = ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0};
  const bool ok = std::abs(s1 - 1.0) <= 1e-12 && std::abs(s2 + 1.0) <= 1e-12 &&
                  std::abs(p3 - 1.0) <= 1e-12 && ties;
  return {ok, Fmt("srcc monotone %.15f, anti %.15f, plcc affine %.15f, ranks [1,2,2,3] -> "
                  "[%g,%g,%g,%g]",
                  s1, s2, p3, ranks[0], ranks[1], ranks[2], ranks[3])};
}

Outcome ReferenceRanges() {
  // glcm_normalized over synthetic extremes, random images and photos.
  double lo = 1.0, hi = 0.0;
  auto track = [&](const ImageU8& img) {
    const double v = GlcmScore(img).glcm_normalized;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& [name, img] : testing::SyntheticCorpus(0)) track(img);
  std::mt19937_64 rng(61);
  for (int i = 0; i < 5; ++i) {
    ImageU8 img(128, 128, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    track(img);
  }
  double cr_lo = 1e9, cr_hi = 0.0;
  for (const auto& path : testing::PhotoFiles()) {
    const ImageU8 big = testing::MirrorTile(LoadImage(path), 2048, 2048);
    const DetailScores s = ScoreImage(big);
    lo = std::min(lo, s.glcm_normalized);
    hi = std::max(hi, s.glcm_normalized);
    cr_lo = std::min(cr_lo, s.compression_ratio);
    cr_hi = std::max(cr_hi, s.compression_ratio);
  }
  const bool ok = lo > 0.0 && hi <= 1.0 && cr_lo >= 3.0 && cr_hi <= 40.0;
  return {ok, Fmt("glcm_normalized in [%.4f, %.4f]; photo CR at 2048^2 in [%.2f, %.2f]", lo,
                  hi, cr_lo, cr_hi)};
}

Outcome Performance() {
  const ImageU8 big = testing::MirrorTile(LoadImage(testing::PhotoDir() / "coffee.png"), 4096, 4096);
  auto t0 = Clock::now();
  ScoreImage(big);
  const double single = Seconds(t0);

  testing::TempDir dir;
  const auto photos = testing::PhotoFiles();
  for (int i = 0; i < 16; ++i) {
    const ImageU8 src = LoadImage(photos[static_cast<std::size_t>(i) % photos.size()]);
    SavePng(testing::MirrorTile(src, 768 + 16 * static_cast<std::size_t>(i), 768),
            dir.path() / Fmt("img%02d.png", i));
  }
  ScanOptions opt;
  opt.jobs = 1;
  t0 = Clock::now();
  const ScanResult serial = ScanAndScore(dir.path(), opt);
  const double t1 = Seconds(t0);
  opt.jobs = 8;
  t0 = Clock::now();
  const ScanResult parallel = ScanAndScore(dir.path(), opt);
  const double t8 = Seconds(t0);
  const double speedup = t1 / t8;
  const bool same = serial.stats.scored == 16 && parallel.stats.scored == 16 &&
                    FormatReport(serial.records, serial.stats, ReportFormat::kCsv, {false}) ==
                        FormatReport(parallel.records, parallel.stats, ReportFormat::kCsv, {false});
  const unsigned cores = std::thread::hardware_concurrency();
  return {single < 10.0 && speedup >= 4.0 && same,
          Fmt("4096^2 score %.2f s; 16-image scan 1 worker %.2f s, 8 workers %.2f s, "
              "speedup %.2fx on %u hardware thread(s); reports identical %s",
              single, t1, t8, speedup, cores, same ? "yes" : "no")};
}

}  // namespace
}  // namespace finedetail

int main() {
  using finedetail::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"glcm oracle equivalence", finedetail::GlcmOracle},
      {"glcm analytic cases", finedetail::GlcmAnalytic},
      {"haar parseval and reconstruction", finedetail::Parseval},
      {"wavelet loss equals squared error", finedetail::WlfIdentity},
      {"conv equivalences", finedetail::ConvEquivalence},
      {"gradient check", finedetail::GradientCheck},
      {"toy training", finedetail::ToyTraining},
      {"jpeg determinism and structure", finedetail::JpegStructure},
      {"compression ratio ordering", finedetail::CompressionOrdering},
      {"correlation tooling", finedetail::Correlation},
      {"reference ranges", finedetail::ReferenceRanges},
      {"performance", finedetail::Performance},
  };
  int failures = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
