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

#include "finedetail/bench.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <map>
#include <system_error>
#include <thread>

#include "finedetail/error.h"

namespace finedetail {
namespace {

bool HasImageExtension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

ReportRecord ScoreOne(const std::filesystem::path& file,
                      const ScanOptions& options) {
  ReportRecord r;
  r.path = file.generic_string();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ImageU8 img = LoadImage(file);
    r.width = img.width();
    r.height = img.height();
    if (options.metrics) {
      const DetailScores s = ScoreImage(img, options.glcm, options.jpeg);
      r.glcm_raw = s.glcm_raw;
      r.glcm_normalized = s.glcm_normalized;
      r.compression_ratio = s.compression_ratio;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  r.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

std::vector<HistogramBin> Histogram(const std::vector<double>& v,
                                    std::size_t bin_width) {
  std::map<std::size_t, std::size_t> bins;
  for (double x : v) {
    ++bins[static_cast<std::size_t>(x) / bin_width * bin_width];
  }
  std::vector<HistogramBin> out;
  for (const auto& [lo, n] : bins) out.push_back({lo, n});
  return out;
}

double Mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

double Median(std::vector<double> values) {
  if (values.empty()) throw UndefinedResult("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

DatasetStats ComputeStats(const std::vector<ReportRecord>& records,
                          std::size_t bin_width) {
  FD_REQUIRE(bin_width > 0, "histogram bin width must be positive");
  DatasetStats s;
  s.bin_width = bin_width;
  std::vector<double> heights, widths, glcm, cr;
  for (const ReportRecord& r : records) {
    if (r.decoded()) {
      heights.push_back(static_cast<double>(r.height));
      widths.push_back(static_cast<double>(r.width));
    }
    if (r.ok()) {
      glcm.push_back(r.glcm_raw);
      cr.push_back(r.compression_ratio);
    }
  }
  s.count = heights.size();
  s.scored = glcm.size();
  if (s.count > 0) {
    s.median_height = Median(heights);
    s.median_width = Median(widths);
    s.mean_height = Mean(heights);
    s.mean_width = Mean(widths);
    s.height_hist = Histogram(heights, bin_width);
    s.width_hist = Histogram(widths, bin_width);
  }
  s.mean_glcm_raw = Mean(glcm);
  s.mean_compression_ratio = Mean(cr);
  return s;
}

std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    std::error_code fec;
    if (entry.is_regular_file(fec) && HasImageExtension(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) {
              return a.generic_string() < b.generic_string();
            });
  return files;
}

ScanResult ScoreFiles(const std::vector<std::filesystem::path>& files,
                      const ScanOptions& options) {
  options.glcm.Validate();
  ScanResult result;
  result.records.resize(files.size());
  int jobs = options.jobs > 0
                 ? options.jobs
                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(files.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      result.records[i] = ScoreOne(files[i], options);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::sort(result.records.begin(), result.records.end(),
            [](const ReportRecord& a, const ReportRecord& b) { return a.path < b.path; });
  result.stats = ComputeStats(result.records);
  return result;
}

ScanResult ScanAndScore(const std::filesystem::path& dir,
                        const ScanOptions& options) {
  return ScoreFiles(ListImages(dir), options);
}

}  // namespace finedetail
