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

// Batch scoring of image folders, dataset statistics, rank / linear
// correlation and JSON / CSV reports.

#ifndef FINEDETAIL_BENCH_H_
#define FINEDETAIL_BENCH_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "finedetail/detail_metrics.h"

namespace finedetail {

struct ReportRecord {
  std::string path;
  std::size_t width = 0, height = 0;  // 0 when the file did not decode
  double glcm_raw = 0.0;
  double glcm_normalized = 0.0;
  double compression_ratio = 0.0;
  double elapsed_ms = 0.0;
  std::optional<std::string> error;  // set iff the metric fields are not

  bool decoded() const { return width > 0 && height > 0; }
  bool ok() const { return !error.has_value(); }
};

struct HistogramBin {
  std::size_t lo = 0;  // bin covers [lo, lo + width)
  std::size_t count = 0;
};

struct DatasetStats {
  std::size_t count = 0;  // successfully decoded images
  double median_height = 0.0, mean_height = 0.0;
  double median_width = 0.0, mean_width = 0.0;
  std::size_t bin_width = 512;
  std::vector<HistogramBin> height_hist, width_hist;  // non-empty bins only
  std::size_t scored = 0;  // records without error
  double mean_glcm_raw = 0.0;
  double mean_compression_ratio = 0.0;
};

// Median of an even-length list is the mean of the two central values.
// Throws UndefinedResult on an empty list.
double Median(std::vector<double> values);

DatasetStats ComputeStats(const std::vector<ReportRecord>& records,
                          std::size_t bin_width = 512);

struct ScanOptions {
  GlcmConfig glcm;
  jpeg::EncoderConfig jpeg;
  int jobs = 0;                // <= 0: hardware concurrency
  bool metrics = true;         // false: decode only (dimensions)
};

struct ScanResult {
  std::vector<ReportRecord> records;  // sorted by path
  DatasetStats stats;
};

// Non-recursive listing of *.png, *.jpg and *.jpeg (case-insensitive),
// sorted. Throws IoError if the directory cannot be read.
std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir);

// Per-file failures are recorded in that file's record and never abort the
// scan.
ScanResult ScanAndScore(const std::filesystem::path& dir,
                        const ScanOptions& options = {});
ScanResult ScoreFiles(const std::vector<std::filesystem::path>& files,
                      const ScanOptions& options = {});

// --- correlation -----------------------------------------------------------

struct RatingSeries {
  std::vector<double> metric;
  std::vector<double> rating;

  // Equal lengths, at least 3 entries, all finite.
  void Validate() const;
};

// 1-based ranks; ties share the mean of the ranks they span.
std::vector<double> FractionalRanks(const std::vector<double>& v);

// Pearson correlation. Throws UndefinedResult on zero variance.
double Plcc(const RatingSeries& s);
// Pearson correlation of the fractional ranks.
double Srcc(const RatingSeries& s);

// --- reports ---------------------------------------------------------------

enum class ReportFormat { kJson, kCsv };

inline constexpr const char* kCsvHeader =
    "path,width,height,glcm_raw,glcm_normalized,compression_ratio,elapsed_ms,"
    "error";

struct ReportOptions {
  // false writes 0 for elapsed_ms so reruns are byte-identical.
  bool timing = true;
};

std::string FormatReport(const std::vector<ReportRecord>& records,
                         const DatasetStats& stats, ReportFormat format,
                         const ReportOptions& options = {});
void EmitReport(const std::vector<ReportRecord>& records,
                const DatasetStats& stats, ReportFormat format,
                const std::filesystem::path& out,
                const ReportOptions& options = {});

std::string StatsToJson(const DatasetStats& stats);

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> ParseCsv(const std::string& text);

}  // namespace finedetail

#endif  // FINEDETAIL_BENCH_H_
