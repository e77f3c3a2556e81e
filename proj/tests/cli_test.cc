// Copyright 2026 The Shuffled KDE Authors
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

#include "shuffled_kde/cli.h"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace shuffled_kde {
namespace {

using ::shuffled_kde::testing::Slurp;
using ::shuffled_kde::testing::Spit;
using ::shuffled_kde::testing::TempDir;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult RunCommand(std::vector<std::string> args) {
  args.insert(args.begin(), "shuffled-kde");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  RunResult r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (absl::string_view line :
       absl::StrSplit(Slurp(path), '\n', absl::SkipEmpty())) {
    rows.push_back(absl::StrSplit(line, ','));
  }
  return rows;
}

// Value of `metric` in a results CSV (metric and value are the last two
// columns).
double Metric(const std::string& path, const std::string& metric) {
  for (const auto& row : ReadCsv(path)) {
    if (row.size() >= 2 && row[row.size() - 2] == metric) {
      double v = NAN;
      EXPECT_TRUE(absl::SimpleAtod(row.back(), &v));
      return v;
    }
  }
  ADD_FAILURE() << metric << " not in " << path;
  return NAN;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const RunResult r =
        RunCommand({"gen-synth", "--classes", "3", "--per-class", "40", "--dim",
                    "8", "--separation", "1.0", "--test-per-class", "10",
                    "--seed", "5", "--out", dir_.path()});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string Path(const std::string& name) const { return dir_.file(name); }

  TempDir dir_;
};

TEST_F(CliTest, GenSynthWritesFilesDeterministically) {
  TempDir other;
  const RunResult r =
      RunCommand({"gen-synth", "--classes", "3", "--per-class", "40", "--dim",
                  "8", "--separation", "1.0", "--test-per-class", "10",
                  "--seed", "5", "--out", other.path()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"train.txt", "test.txt", "synth.json"}) {
    EXPECT_EQ(Slurp(Path(name)), Slurp(other.file(name))) << name;
  }
  EXPECT_EQ(Slurp(Path("train.txt")).substr(0, 7), "120 8 3");
}

TEST_F(CliTest, TrainClassifyDecode) {
  const std::string out = Path("run");
  RunResult r =
      RunCommand({"train", "--dataset", Path("train.txt"), "--bitsum", "3nb",
                  "--eps", "7", "-I", "64", "--seed", "9", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("communication-threat"), std::string::npos);
  EXPECT_NEAR(Metric(out + "/train_results.csv", "composed_eps"), 7.0, 1e-8);

  r = RunCommand({"classify", "--model", out + "/model.json", "--dataset",
                  Path("test.txt"), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto predictions = ReadCsv(out + "/predictions.csv");
  ASSERT_EQ(predictions.size(), 31u);
  EXPECT_EQ(predictions[0],
            (std::vector<std::string>{"row", "label", "predicted"}));
  const double accuracy = Metric(out + "/classify_results.csv", "accuracy");
  EXPECT_GE(accuracy, 0.0);
  EXPECT_LE(accuracy, 1.0);
  EXPECT_NE(r.out.find("accuracy"), std::string::npos);

  Spit(Path("vocab.txt"), "east 1 0 0 0 0 0 0 0\nnorth 0 1 0 0 0 0 0 0\n");
  r = RunCommand({"decode", "--model", out + "/model.json", "--vocab",
                  Path("vocab.txt"), "-k", "2", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto decoded = ReadCsv(out + "/decode.csv");
  ASSERT_EQ(decoded.size(), 1u + 3 * 2);
  EXPECT_EQ(decoded[0],
            (std::vector<std::string>{"class", "rank", "term", "score"}));
}

TEST_F(CliTest, TrainIsByteReproducible) {
  std::vector<std::string> contents;
  for (const char* sub : {"a", "b"}) {
    const std::string out = Path(sub);
    const RunResult r =
        RunCommand({"train", "--dataset", Path("train.txt"), "--bitsum",
                    "central-gaussian", "--eps", "3", "--eps-label", "4", "-I",
                    "32", "--seed", "77", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    contents.push_back(Slurp(out + "/model.json"));
  }
  EXPECT_EQ(contents[0], contents[1]);
  EXPECT_FALSE(contents[0].empty());
}

TEST_F(CliTest, AccountPureExample) {
  const RunResult r = RunCommand({"account", "--eps", "6", "--composition",
                                  "pure", "-I", "3", "--s", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("per-instance eps0      1\n"), std::string::npos)
      << r.out;
}

TEST_F(CliTest, AccountWritesCsvWhenAsked) {
  const RunResult r = RunCommand(
      {"account", "--eps", "1,2", "-I", "256", "--out", Path("acct")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = ReadCsv(Path("acct/account.csv"));
  EXPECT_EQ(rows.size(), 1u + 2 * 6);
}

TEST_F(CliTest, AccountInfeasible) {
  const RunResult r = RunCommand({"account", "--eps", "1e-70", "-I", "4096"});
  EXPECT_EQ(r.code, kExitInfeasible) << r.err;
}

TEST_F(CliTest, MeterRandomizedResponse) {
  const RunResult r = RunCommand({"meter", "--dataset", Path("train.txt"),
                                  "--bitsum", "rr", "--p-rr", "0.1", "-I", "32",
                                  "--transcript", "--out", Path("m")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = ReadCsv(Path("m/meter_per_user.csv"));
  ASSERT_EQ(rows.size(), 121u);
  for (size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][1], "32");
    EXPECT_EQ(rows[k][2], std::to_string(32 * 6));
  }
  EXPECT_EQ(Metric(Path("m/meter_results.csv"), "bits_per_message"), 6.0);
  EXPECT_EQ(ReadCsv(Path("m/transcript.csv")).size(), 1u + 120 * 32);
}

TEST_F(CliTest, MeterDegenerateDefaultRr) {
  const RunResult r =
      RunCommand({"meter", "--dataset", Path("train.txt"), "--bitsum", "rr",
                  "-I", "8", "--out", Path("m")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("DegenerateConfig"), std::string::npos) << r.err;
}

TEST_F(CliTest, KdeEvalReportsBoundNextToEmpirical) {
  const RunResult r =
      RunCommand({"kde-eval", "--dataset", Path("train.txt"), "--num-queries",
                  "5", "--trials", "30", "-I", "64", "--out", Path("k")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = ReadCsv(Path("k/kde_eval.csv"));
  ASSERT_EQ(rows.size(), 2u);
  const std::vector<std::string>& header = rows[0];
  auto column = [&](const std::string& name) {
    for (size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    ADD_FAILURE() << "missing column " << name;
    return size_t{0};
  };
  double empirical = 0.0;
  double bound = 0.0;
  ASSERT_TRUE(
      absl::SimpleAtod(rows[1][column("empirical_max_rmse")], &empirical));
  ASSERT_TRUE(absl::SimpleAtod(rows[1][column("theoretical_bound")], &bound));
  EXPECT_GT(empirical, 0.0);
  EXPECT_LE(empirical, bound);
  EXPECT_NEAR(bound, 1.0, 1e-12);  // 8 / sqrt(64)
  EXPECT_EQ(ReadCsv(Path("k/kde_eval_per_query.csv")).size(), 6u);
}

TEST_F(CliTest, ConfigFileFillsUnsetOptions) {
  Spit(Path("cfg.json"),
       "{\"eps\": [6], \"composition\": \"pure\", \"repetitions\": 2, "
       "\"s\": 3, \"unknown_key\": 1}");
  RunResult r = RunCommand({"account", "--config", Path("cfg.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("per-instance eps0      1\n"), std::string::npos)
      << r.out;
  // The command line wins over the file.
  r = RunCommand({"account", "--config", Path("cfg.json"), "-I", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("per-instance eps0      2\n"), std::string::npos)
      << r.out;
}

TEST_F(CliTest, ValidationErrors) {
  EXPECT_EQ(RunCommand({"train", "--dataset", Path("train.txt"), "--kernel",
                        "laplace"})
                .code,
            kExitValidation);
  EXPECT_EQ(RunCommand({"train"}).code, kExitValidation);
  EXPECT_EQ(RunCommand({"no-such-command"}).code, kExitValidation);
  EXPECT_EQ(RunCommand({"train", "--dataset", Path("missing.txt")}).code,
            kExitValidation);
  EXPECT_EQ(
      RunCommand({"train", "--dataset", Path("train.txt"), "--eps", "1,2"})
          .code,
      kExitValidation);
  EXPECT_EQ(RunCommand({"account", "--config", Path("missing.json")}).code,
            kExitValidation);

  Spit(Path("bad.txt"), "2 8 2\n1 0 0 0 0 0 0 0 1\n");
  const RunResult r = RunCommand(
      {"train", "--dataset", Path("bad.txt"), "--out", Path("never")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_FALSE(std::filesystem::exists(Path("never/model.json")));
}

TEST_F(CliTest, TrainInfeasible) {
  const RunResult r =
      RunCommand({"train", "--dataset", Path("train.txt"), "--eps", "1e-70",
                  "-I", "1024", "--out", Path("x")});
  EXPECT_EQ(r.code, kExitInfeasible) << r.err;
}

TEST_F(CliTest, HelpExitsCleanly) {
  EXPECT_EQ(RunCommand({"--help"}).code, kExitOk);
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), kExitOk);
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("x")), kExitValidation);
  EXPECT_EQ(ExitCodeFor(absl::FailedPreconditionError("x")), kExitValidation);
  EXPECT_EQ(ExitCodeFor(absl::OutOfRangeError("x")), kExitInfeasible);
  EXPECT_EQ(ExitCodeFor(absl::PermissionDeniedError("x")), kExitIo);
  EXPECT_EQ(ExitCodeFor(absl::DataLossError("x")), kExitIo);
}

}  // namespace
}  // namespace shuffled_kde
