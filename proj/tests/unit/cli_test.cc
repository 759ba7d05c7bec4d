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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "finedetail/bench.h"
#include "finedetail/image.h"
#include "gtest/gtest.h"
#include "test_support.h"

namespace finedetail {
namespace {

int RunCli(const std::string& args) {
  const std::string cmd = std::string(FD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const std::filesystem::path& p) {
  const auto b = ReadFileBytes(p);
  return std::string(b.begin(), b.end());
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("conv-check --cases 20"), 0);
  EXPECT_EQ(RunCli("score /nonexistent/dir"), 1);
  EXPECT_EQ(RunCli("score"), 2);
  EXPECT_EQ(RunCli("bogus"), 2);
  EXPECT_EQ(RunCli("train --steps 0 --out /dev/null"), 2);
  EXPECT_EQ(RunCli("conv-check --cases 0"), 2);
}

TEST(CliTest, ScoreCsvThenCorrelate) {
  testing::TempDir dir;
  const auto csv = dir.path() / "m.csv";
  ASSERT_EQ(RunCli("score " + testing::PhotoDir().string() + " --format csv --no-timing --out " +
                csv.string()),
            0);
  const auto rows = ParseCsv(Slurp(csv));
  ASSERT_EQ(rows.size(), 8u);
  // Ratings keyed by file name; the rating is the metric itself, so SRCC = 1.
  std::ofstream r(dir.path() / "r.csv");
  r << "path,rating\n";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    r << std::filesystem::path(rows[i][0]).filename().string() << "," << rows[i][5] << "\n";
  }
  r.close();
  const std::string cmd = std::string(FD_CLI_PATH) + " correlate " + csv.string() + " " +
                          (dir.path() / "r.csv").string() +
                          " --metric compression_ratio > " + (dir.path() / "o.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const std::string out = Slurp(dir.path() / "o.txt");
  EXPECT_NE(out.find("srcc 1.000000"), std::string::npos) << out;
  const std::string rcmd = std::string(FD_CLI_PATH) + " correlate " + csv.string() + " " +
                           (dir.path() / "r.csv").string() +
                           " --metric compression_ratio --reciprocal > " +
                           (dir.path() / "o2.txt").string();
  ASSERT_EQ(std::system(rcmd.c_str()), 0);
  EXPECT_NE(Slurp(dir.path() / "o2.txt").find("srcc -1.000000"), std::string::npos);
}

TEST(CliTest, DwtWritesFourBands) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("dwt " + (testing::PhotoDir() / "chelsea.png").string() + " --out-dir " +
                dir.path().string()),
            0);
  for (const char* b : {"ll", "lh", "hl", "hh"}) {
    const ImageU8 img = LoadImage(dir.path() / (std::string(b) + ".png"));
    EXPECT_EQ(img.width(), 451u / 2);
    EXPECT_EQ(img.height(), 150u);
  }
}

TEST(CliTest, TrainWritesReportAndParams) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("train --steps 30 --weights 1,2,2,2 --seed 4 --out " +
                (dir.path() / "t.json").string() + " --params-out " +
                (dir.path() / "p.bin").string()),
            0);
  EXPECT_NE(Slurp(dir.path() / "t.json").find("\"e_hh\""), std::string::npos);
  EXPECT_GT(std::filesystem::file_size(dir.path() / "p.bin"), 100u);
  EXPECT_EQ(RunCli("train --weights 1,2 --out /dev/null"), 2);
}

TEST(CliTest, StatsSubcommand) {
  testing::TempDir dir;
  ASSERT_EQ(RunCli("stats " + testing::PhotoDir().string() + " --out " +
                (dir.path() / "s.json").string()),
            0);
  EXPECT_NE(Slurp(dir.path() / "s.json").find("\"median_height\": 512"), std::string::npos);
}

}  // namespace
}  // namespace finedetail
