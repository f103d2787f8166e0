// Copyright 2026 The SynOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "synoe/audit.hpp"
#include "synoe/manifest_io.hpp"
#include "synoe/metrics.hpp"

namespace synoe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "synoe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::SceneOptions opts;
    opts.width = 640;
    opts.height = 480;
    input_ = testing::WriteScenes(dir_ / "in", testing::RandomScenes(6, 5, opts));
    manifest_ = (dir_ / "in" / "manifest.json").string();
  }
  TempDir dir_;
  DatasetManifest input_;
  std::string manifest_;
};

TEST_F(CliTest, ValidateAcceptsAndRejects) {
  EXPECT_EQ(Cli({"validate", "--manifest", manifest_, "--check-files"}).code, cli::kExitOk);
  fs::remove(dir_ / "in" / "images" / "001.png");
  EXPECT_EQ(Cli({"validate", "--manifest", manifest_}).code, cli::kExitOk);
  EXPECT_EQ(Cli({"validate", "--manifest", manifest_, "--check-files"}).code,
            cli::kExitInvalid);
  {
    std::ofstream bad(dir_ / "bad.json");
    bad << "{not json";
  }
  EXPECT_EQ(Cli({"validate", "--manifest", (dir_ / "bad.json").string()}).code,
            cli::kExitInvalid);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, cli::kExitInvalid);
  EXPECT_EQ(Cli({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(Cli({"generate", "--input", manifest_, "--out", (dir_ / "o").string(),
                 "--variant", "V9", "--mock"})
                .code,
            cli::kExitInvalid);
  EXPECT_EQ(Cli({"generate", "--input", manifest_, "--out", (dir_ / "o").string(),
                 "--variant", "V1"})
                .code,
            cli::kExitInvalid);
  EXPECT_EQ(Cli({"generate", "--input", manifest_, "--out", (dir_ / "o").string(),
                 "--variant", "V1", "--mock", "--proportion", "2"})
                .code,
            cli::kExitInvalid);
}

TEST_F(CliTest, ExitCodeFromRealBinary) {
  const std::string cmd = std::string(SYNOE_BINARY) + " generate --input " + manifest_ +
                          " --out " + (dir_ / "o").string() +
                          " --variant V9 --mock > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 1);
  const std::string missing = std::string(SYNOE_BINARY) + " validate --manifest " +
                              (dir_ / "nope.json").string() + " > /dev/null 2>&1";
  const int s2 = std::system(missing.c_str());
  ASSERT_TRUE(WIFEXITED(s2));
  EXPECT_EQ(WEXITSTATUS(s2), 2);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const std::string out = (dir_ / "gen").string();
  std::vector<std::string> args = {"generate", "--input",   manifest_, "--out",  out,
                                   "--variant", "V5",       "--mock",  "--seed", "9",
                                   "--proportion", "0.5",   "--workers", "1"};
  const Outcome a = Cli(args);
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  const std::string first = testing::ReadText(fs::path(out) / "manifest.json");
  const json report = json::parse(a.out);
  EXPECT_EQ(report.at("images_selected"), 3);
  fs::remove_all(out);
  args.back() = "3";
  const Outcome b = Cli(args);
  ASSERT_EQ(b.code, cli::kExitOk) << b.err;
  EXPECT_EQ(first, testing::ReadText(fs::path(out) / "manifest.json"));
  EXPECT_EQ(a.out, b.out);

  const DatasetManifest m = LoadManifest(fs::path(out) / "manifest.json");
  const json& gen = m.meta.extra.at("generation");
  EXPECT_EQ(gen.at("variant"), "V5");
  EXPECT_EQ(gen.at("services").at("mode"), "mock");
  EXPECT_EQ(m.meta.seed, 9u);
}

TEST_F(CliTest, ConfigFileAndEnvironment) {
  {
    std::ofstream cfg(dir_ / "run.cfg");
    cfg << "# generation settings\n"
        << "variant = V4\n"
        << "proportion = 1.0\n"
        << "seed = 4\n"
        << "mock = true\n"
        << "per_image_count_weights = 1 0 0\n"
        << "inpaint_url = \"http://config.invalid\"\n";
  }
  const auto config = cli::ReadConfigFile(dir_ / "run.cfg");
  EXPECT_EQ(config.at("variant"), "V4");
  EXPECT_EQ(config.at("inpaint_url"), "http://config.invalid");

  EXPECT_EQ(cli::Resolve(std::string("flag"), "SYNOE_TEST_ENV", config, "variant"), "flag");
  ::setenv("SYNOE_TEST_ENV", "env", 1);
  EXPECT_EQ(cli::Resolve(std::nullopt, "SYNOE_TEST_ENV", config, "variant"), "env");
  ::unsetenv("SYNOE_TEST_ENV");
  EXPECT_EQ(cli::Resolve(std::nullopt, "SYNOE_TEST_ENV", config, "variant"), "V4");
  EXPECT_EQ(cli::Resolve(std::nullopt, nullptr, config, "missing"), std::nullopt);

  const std::string out = (dir_ / "cfg").string();
  const Outcome r = Cli({"generate", "--input", manifest_, "--out", out, "--config",
                         (dir_ / "run.cfg").string(), "--proportion", "0.5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const DatasetManifest m = LoadManifest(fs::path(out) / "manifest.json");
  EXPECT_EQ(m.meta.variant, Variant::kV4);
  EXPECT_EQ(m.meta.seed, 4u);
  EXPECT_EQ(m.meta.extra.at("generation").at("proportion"), 0.5);
  EXPECT_EQ(m.meta.extra.at("generation").at("per_image_count_weights"),
            json::array({1.0, 0.0, 0.0}));

  {
    std::ofstream bad(dir_ / "bad.cfg");
    bad << "variant V4\n";
  }
  EXPECT_EQ(Cli({"generate", "--input", manifest_, "--out", out, "--config",
                 (dir_ / "bad.cfg").string()})
                .code,
            cli::kExitInvalid);
}

TEST_F(CliTest, AuditThenEvalPassThrough) {
  const std::string out = (dir_ / "gen").string();
  ASSERT_EQ(Cli({"generate", "--input", manifest_, "--out", out, "--variant", "V1", "--mock",
                 "--proportion", "1"})
                .code,
            cli::kExitOk);
  const std::string audited = (dir_ / "audited.json").string();
  const std::string report = (dir_ / "audit.json").string();
  const Outcome a = Cli({"audit", "--manifest", out + "/manifest.json", "--evidence",
                         out + "/evidence.json", "--out", audited, "--report", report});
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  const AuditResult direct = AuditManifest(LoadManifest(out + "/manifest.json"),
                                           LoadEvidence(out + "/evidence.json"));
  EXPECT_EQ(json::parse(testing::ReadText(report)), direct.report.ToJson());
  EXPECT_EQ(LoadManifest(audited).annotations, direct.manifest.annotations);

  const DatasetManifest gt = LoadManifest(audited);
  DetectionDump dump;
  double score = 0.99;
  for (const auto& ann : gt.annotations) {
    if (ann.provenance == Provenance::kRemoved) continue;
    BBox b = ann.bbox;
    b.x += 1;
    dump.entries.push_back({ann.image_id, b, ann.category_index, score});
    score -= 0.01;
  }
  WriteTextFile(dir_ / "dets.json", DetectionDumpToJson(dump).dump());
  const std::string eval_out = (dir_ / "eval.json").string();
  const Outcome e = Cli({"eval", "--gt", audited, "--dets", (dir_ / "dets.json").string(),
                         "--out", eval_out});
  ASSERT_EQ(e.code, cli::kExitOk) << e.err;
  const EvalReport expected = Evaluate(gt, dump);
  EXPECT_EQ(json::parse(testing::ReadText(eval_out)), expected.ToJson());
  EXPECT_EQ(e.out, expected.FormatTable());

  dump.entries.push_back({1, {0, 0, 5, 5}, 77, 0.5});
  WriteTextFile(dir_ / "bad_dets.json", DetectionDumpToJson(dump).dump());
  EXPECT_EQ(Cli({"eval", "--gt", audited, "--dets", (dir_ / "bad_dets.json").string()}).code,
            cli::kExitInvalid);
}

}  // namespace
}  // namespace synoe
