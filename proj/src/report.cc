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

#include <algorithm>
#include <charconv>
#include <string>

#include "finedetail/bench.h"
#include "finedetail/error.h"
#include "finedetail/image.h"
#include "json.hpp"

namespace finedetail {
namespace {

using Json = nlohmann::ordered_json;

std::string Num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json HistJson(const std::vector<HistogramBin>& h) {
  Json arr = Json::array();
  for (const HistogramBin& b : h) arr.push_back({{"lo", b.lo}, {"count", b.count}});
  return arr;
}

Json StatsJson(const DatasetStats& s) {
  Json j;
  j["count"] = s.count;
  j["median_height"] = s.median_height;
  j["mean_height"] = s.mean_height;
  j["median_width"] = s.median_width;
  j["mean_width"] = s.mean_width;
  j["bin_width"] = s.bin_width;
  j["height_hist"] = HistJson(s.height_hist);
  j["width_hist"] = HistJson(s.width_hist);
  j["scored"] = s.scored;
  j["mean_glcm_raw"] = s.mean_glcm_raw;
  j["mean_compression_ratio"] = s.mean_compression_ratio;
  return j;
}

std::vector<const ReportRecord*> Sorted(const std::vector<ReportRecord>& records) {
  std::vector<const ReportRecord*> out;
  for (const ReportRecord& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(),
                   [](const ReportRecord* a, const ReportRecord* b) {
                     return a->path < b->path;
                   });
  return out;
}

}  // namespace

std::string StatsToJson(const DatasetStats& stats) {
  return StatsJson(stats).dump(2) + "\n";
}

std::string FormatReport(const std::vector<ReportRecord>& records,
                         const DatasetStats& stats, ReportFormat format,
                         const ReportOptions& options) {
  const auto sorted = Sorted(records);
  if (format == ReportFormat::kCsv) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const ReportRecord* r : sorted) {
      const bool ok = r->ok();
      out += CsvField(r->path) + "," + std::to_string(r->width) + "," +
             std::to_string(r->height) + "," + (ok ? Num(r->glcm_raw) : "") + "," +
             (ok ? Num(r->glcm_normalized) : "") + "," +
             (ok ? Num(r->compression_ratio) : "") + "," +
             Num(options.timing ? r->elapsed_ms : 0.0) + "," +
             CsvField(r->error.value_or("")) + "\n";
    }
    return out;
  }
  Json j;
  j["stats"] = StatsJson(stats);
  Json recs = Json::array();
  for (const ReportRecord* r : sorted) {
    Json rec;
    rec["path"] = r->path;
    rec["width"] = r->width;
    rec["height"] = r->height;
    if (r->ok()) {
      rec["glcm_raw"] = r->glcm_raw;
      rec["glcm_normalized"] = r->glcm_normalized;
      rec["compression_ratio"] = r->compression_ratio;
    } else {
      rec["error"] = *r->error;
    }
    rec["elapsed_ms"] = options.timing ? r->elapsed_ms : 0.0;
    recs.push_back(std::move(rec));
  }
  j["records"] = std::move(recs);
  return j.dump(2) + "\n";
}

void EmitReport(const std::vector<ReportRecord>& records,
                const DatasetStats& stats, ReportFormat format,
                const std::filesystem::path& out, const ReportOptions& options) {
  const std::string text = FormatReport(records, stats, format, options);
  WriteFileBytes(out, std::span<const std::uint8_t>(
                          reinterpret_cast<const std::uint8_t*>(text.data()),
                          text.size()));
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DecodeError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace finedetail
