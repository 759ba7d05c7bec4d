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

// finedetail: batch fine-detail scoring and verification tool.
//
// Exit codes: 0 ok, 1 fatal I/O (also undecodable input and diverged
// training), 2 contract violation / bad usage, 3 equivalence failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finedetail/bench.h"
#include "finedetail/blob.h"
#include "finedetail/conv_check.h"
#include "finedetail/error.h"
#include "finedetail/flow.h"
#include "finedetail/image.h"
#include "finedetail/wavelet.h"

namespace fd = finedetail;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitContract = 2;
constexpr int kExitEquivalence = 3;

int ExitCodeFor(const fd::Error& e) {
  switch (e.kind()) {
    case fd::ErrorKind::kContract:
    case fd::ErrorKind::kUndefined:
      return kExitContract;
    case fd::ErrorKind::kEquivalence:
      return kExitEquivalence;
    default:
      return kExitIo;
  }
}

std::string ReadText(const fs::path& p) {
  const auto bytes = fd::ReadFileBytes(p);
  return std::string(bytes.begin(), bytes.end());
}

void WriteText(const fs::path& p, const std::string& text) {
  fd::WriteFileBytes(p, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

double ParseDouble(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw fd::ContractViolation(what + ": '" + s + "' is not a number");
  }
}

// --- score / stats ---------------------------------------------------------

struct ScoreArgs {
  std::string dir;
  int patch_size = 64;
  int levels = 64;
  bool symmetric = false;
  std::string pool_mode = "per-offset";
  int jobs = 0;
  std::string format = "json";
  std::string out;
  bool no_timing = false;
  int quality = 95;
  std::string subsampling = "420";
};

int RunScore(const ScoreArgs& a) {
  fd::ScanOptions opt;
  opt.glcm.patch_size = a.patch_size;
  opt.glcm.levels = a.levels;
  opt.glcm.symmetric = a.symmetric;
  opt.glcm.pool = a.pool_mode == "accumulated" ? fd::PoolMode::kAccumulated
                                               : fd::PoolMode::kPerOffset;
  opt.jpeg.quality = a.quality;
  opt.jpeg.subsampling =
      a.subsampling == "444" ? fd::jpeg::Subsampling::k444 : fd::jpeg::Subsampling::k420;
  opt.jobs = a.jobs;
  const fd::ScanResult r = fd::ScanAndScore(a.dir, opt);
  const auto format = a.format == "csv" ? fd::ReportFormat::kCsv : fd::ReportFormat::kJson;
  fd::ReportOptions ropt;
  ropt.timing = !a.no_timing;
  const std::string text = fd::FormatReport(r.records, r.stats, format, ropt);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    WriteText(a.out, text);
  }
  std::size_t failed = 0;
  for (const auto& rec : r.records) failed += rec.ok() ? 0 : 1;
  std::cerr << "scored " << r.records.size() - failed << " of " << r.records.size()
            << " files\n";
  return kExitOk;
}

int RunStats(const std::string& dir, int jobs, const std::string& out) {
  fd::ScanOptions opt;
  opt.metrics = false;
  opt.jobs = jobs;
  const fd::ScanResult r = fd::ScanAndScore(dir, opt);
  const std::string text = fd::StatsToJson(r.stats);
  if (out.empty()) {
    std::cout << text;
  } else {
    WriteText(out, text);
  }
  return kExitOk;
}

// --- correlate -------------------------------------------------------------

std::size_t Column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& file) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw fd::ContractViolation(file + ": no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

int RunCorrelate(const std::string& metrics_csv, const std::string& ratings_csv,
                 const std::string& metric, const std::string& rating_col,
                 bool reciprocal) {
  const auto mrows = fd::ParseCsv(ReadText(metrics_csv));
  const auto rrows = fd::ParseCsv(ReadText(ratings_csv));
  if (mrows.empty() || rrows.empty()) {
    throw fd::ContractViolation("metrics and ratings files need a header row");
  }
  const std::size_t mp = Column(mrows[0], "path", metrics_csv);
  const std::size_t mv = Column(mrows[0], metric, metrics_csv);
  const std::size_t rp = Column(rrows[0], "path", ratings_csv);
  const std::size_t rv = Column(rrows[0], rating_col, ratings_csv);

  std::map<std::string, double> by_path, by_name;
  for (std::size_t i = 1; i < rrows.size(); ++i) {
    const auto& row = rrows[i];
    if (row.size() <= std::max(rp, rv)) continue;
    const double v = ParseDouble(row[rv], ratings_csv);
    by_path[row[rp]] = v;
    by_name[fs::path(row[rp]).filename().string()] = v;
  }
  fd::RatingSeries s;
  std::size_t unmatched = 0;
  for (std::size_t i = 1; i < mrows.size(); ++i) {
    const auto& row = mrows[i];
    if (row.size() <= std::max(mp, mv) || row[mv].empty()) continue;
    double m = ParseDouble(row[mv], metrics_csv);
    const double* rating = nullptr;
    if (auto it = by_path.find(row[mp]); it != by_path.end()) {
      rating = &it->second;
    } else if (auto jt = by_name.find(fs::path(row[mp]).filename().string());
               jt != by_name.end()) {
      rating = &jt->second;
    }
    if (rating == nullptr) {
      ++unmatched;
      continue;
    }
    if (reciprocal) {
      FD_REQUIRE(m != 0.0, "reciprocal of a zero metric value");
      m = 1.0 / m;
    }
    s.metric.push_back(m);
    s.rating.push_back(*rating);
  }
  const double srcc = fd::Srcc(s);
  const double plcc = fd::Plcc(s);
  std::printf("pairs %zu\nsrcc %.6f\nplcc %.6f\n", s.metric.size(), srcc, plcc);
  if (unmatched > 0) std::fprintf(stderr, "%zu metric rows had no rating\n", unmatched);
  return kExitOk;
}

// --- dwt -------------------------------------------------------------------

int RunDwt(const std::string& image, const std::string& out_dir) {
  fd::ImageU8 img = fd::LoadImage(image);
  const std::size_t w = img.width() & ~std::size_t{1};
  const std::size_t h = img.height() & ~std::size_t{1};
  FD_REQUIRE(w >= 2 && h >= 2, "image must be at least 2x2");
  fd::TensorD x(img.channels(), h, w);
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t xx = 0; xx < w; ++xx) x.at(c, y, xx) = img.at(xx, y, c);
    }
  }
  const fd::SubBands<double> bands = fd::DwtHaar(x);
  fs::create_directories(out_dir);
  for (int b = 0; b < 4; ++b) {
    const fd::TensorD& t = bands[static_cast<fd::Band>(b)];
    fd::ImageU8 out(t.width(), t.height(), t.channels());
    for (std::size_t c = 0; c < t.channels(); ++c) {
      for (std::size_t y = 0; y < t.height(); ++y) {
        for (std::size_t xx = 0; xx < t.width(); ++xx) {
          // ll spans [0, 510], detail bands [-255, 255]
          const double v = b == 0 ? t.at(c, y, xx) / 2.0 : 128.0 + t.at(c, y, xx) / 2.0;
          out.at(xx, y, c) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
        }
      }
    }
    const fs::path p = fs::path(out_dir) / (std::string(fd::kBandNames[b]) + ".png");
    fd::SavePng(out, p);
    std::cout << p.string() << "\n";
  }
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string objective = "velocity";
  std::string weights = "1,1,1,1";
  std::string weight_mode = "constant";
  std::string loss_path = "wavelet";
  int steps = 500;
  int batch = 8;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  std::size_t size = 16;
  std::size_t channels = 2;
  std::size_t hidden = 16;
  int log_every = 10;
  std::string out;
  std::string params_out;
};

fd::BandWeights ParseWeights(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(ParseDouble(item, "--weights"));
  FD_REQUIRE(v.size() == 4, "--weights needs four values ll,lh,hl,hh");
  fd::BandWeights w{v[0], v[1], v[2], v[3]};
  w.Validate();
  return w;
}

int RunTrain(const TrainArgs& a) {
  fd::flow::TrainConfig cfg;
  cfg.objective = a.objective == "noise" ? fd::flow::Objective::kNoise
                                         : fd::flow::Objective::kVelocity;
  cfg.band_weights = ParseWeights(a.weights);
  cfg.weight_mode = a.weight_mode == "sigma2" ? fd::flow::WeightMode::kSigmaSquared
                                              : fd::flow::WeightMode::kConstant;
  cfg.loss_path = a.loss_path == "plain" ? fd::flow::LossPath::kPlain
                                         : fd::flow::LossPath::kWavelet;
  cfg.steps = a.steps;
  cfg.batch = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.size = a.size;
  cfg.channels = a.channels;
  cfg.hidden = a.hidden;
  cfg.log_every = a.log_every;
  const fd::flow::TrainReport r = fd::flow::Train(cfg);
  WriteText(a.out, r.ToJson() + "\n");
  if (!a.params_out.empty()) {
    fd::flow::DenoiserModel m(r.channels, r.hidden);
    std::copy(r.final_params.begin(), r.final_params.end(), m.params().begin());
    fd::WriteFileBytes(a.params_out, fd::EncodeBlob(m.ToBlob()));
  }
  std::printf("initial_loss %.6g\nfinal_loss %.6g\nratio %.4f\n", r.initial_loss,
              r.final_loss, r.final_loss / r.initial_loss);
  return kExitOk;
}

// --- conv-check ------------------------------------------------------------

int RunConvCheck(int cases, std::uint64_t seed) {
  FD_REQUIRE(cases >= 1, "--cases must be positive");
  const fd::EquivalenceSummary tiled = fd::CheckTiledUpsampleConv(cases, seed);
  const fd::EquivalenceSummary dual = fd::CheckDilationDuality(cases, seed + 1);
  auto print = [](const char* name, const fd::EquivalenceSummary& s) {
    std::printf("%-20s %s cases=%d failures=%d max_err_f32=%.3g max_err_f64=%.3g\n",
                name, s.ok() ? "PASS" : "FAIL", s.cases, s.failures,
                s.max_err_single, s.max_err_double);
    if (!s.ok()) std::printf("  first failure: %s\n", s.first_failure.c_str());
  };
  print("tiled-upsample-conv", tiled);
  print("dilation-duality", dual);
  return tiled.ok() && dual.ok() ? kExitOk : kExitEquivalence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fine-detail image metrics and verification suites"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score every image in a directory");
  score_cmd->add_option("dir", score.dir, "Image directory")->required();
  score_cmd->add_option("--patch-size", score.patch_size, "GLCM patch size");
  score_cmd->add_option("--levels", score.levels, "Gray levels");
  score_cmd->add_flag("--symmetric", score.symmetric, "Symmetric co-occurrence");
  score_cmd->add_option("--pool-mode", score.pool_mode, "per-offset|accumulated")
      ->check(CLI::IsMember({"per-offset", "accumulated"}));
  score_cmd->add_option("--jobs", score.jobs, "Worker threads (0 = all cores)");
  score_cmd->add_option("--format", score.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  score_cmd->add_option("--out", score.out, "Output path (default stdout)");
  score_cmd->add_flag("--no-timing", score.no_timing, "Write elapsed_ms as 0");
  score_cmd->add_option("--quality", score.quality, "JPEG quality");
  score_cmd->add_option("--subsampling", score.subsampling, "420|444")
      ->check(CLI::IsMember({"420", "444"}));

  std::string stats_dir, stats_out;
  int stats_jobs = 0;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset height/width statistics");
  stats_cmd->add_option("dir", stats_dir, "Image directory")->required();
  stats_cmd->add_option("--jobs", stats_jobs, "Worker threads");
  stats_cmd->add_option("--out", stats_out, "Output path (default stdout)");

  std::string metrics_csv, ratings_csv, metric = "glcm_raw", rating_col = "rating";
  bool reciprocal = false;
  auto* corr_cmd = app.add_subcommand("correlate", "SRCC and PLCC against ratings");
  corr_cmd->add_option("metrics", metrics_csv, "CSV report from 'score'")->required();
  corr_cmd->add_option("ratings", ratings_csv, "CSV with path,rating")->required();
  corr_cmd->add_option("--metric", metric, "Metric column")
      ->check(CLI::IsMember({"glcm_raw", "glcm_normalized", "compression_ratio"}));
  corr_cmd->add_option("--rating-column", rating_col, "Rating column");
  corr_cmd->add_flag("--reciprocal", reciprocal, "Correlate 1 / metric");

  std::string dwt_image, dwt_out;
  auto* dwt_cmd = app.add_subcommand("dwt", "Write the four Haar sub-band images");
  dwt_cmd->add_option("image", dwt_image, "Input image")->required();
  dwt_cmd->add_option("--out-dir", dwt_out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Toy diffusion training run");
  train_cmd->add_option("--objective", train.objective, "velocity|noise")
      ->check(CLI::IsMember({"velocity", "noise"}));
  train_cmd->add_option("--weights", train.weights, "Band weights ll,lh,hl,hh");
  train_cmd->add_option("--weight-mode", train.weight_mode, "constant|sigma2")
      ->check(CLI::IsMember({"constant", "sigma2"}));
  train_cmd->add_option("--loss", train.loss_path, "wavelet|plain")
      ->check(CLI::IsMember({"wavelet", "plain"}));
  train_cmd->add_option("--steps", train.steps, "Gradient steps");
  train_cmd->add_option("--batch", train.batch, "Batch size");
  train_cmd->add_option("--lr", train.lr, "Learning rate");
  train_cmd->add_option("--seed", train.seed, "Seed");
  train_cmd->add_option("--size", train.size, "Image side");
  train_cmd->add_option("--channels", train.channels, "Channels");
  train_cmd->add_option("--hidden", train.hidden, "Hidden channels");
  train_cmd->add_option("--log-every", train.log_every, "Curve sampling period");
  train_cmd->add_option("--out", train.out, "Report JSON")->required();
  train_cmd->add_option("--params-out", train.params_out, "Final parameter blob");

  int cases = 200;
  std::uint64_t check_seed = 1;
  auto* check_cmd = app.add_subcommand("conv-check", "Conv equivalence suites");
  check_cmd->add_option("--cases", cases, "Random cases per suite");
  check_cmd->add_option("--seed", check_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitContract;
  }

  try {
    if (*score_cmd) return RunScore(score);
    if (*stats_cmd) return RunStats(stats_dir, stats_jobs, stats_out);
    if (*corr_cmd) {
      return RunCorrelate(metrics_csv, ratings_csv, metric, rating_col, reciprocal);
    }
    if (*dwt_cmd) return RunDwt(dwt_image, dwt_out);
    if (*train_cmd) return RunTrain(train);
    if (*check_cmd) return RunConvCheck(cases, check_seed);
  } catch (const fd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
