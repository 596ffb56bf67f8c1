#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sqapprox/cli.hpp"
#include "sqapprox/measure.hpp"
#include "sqapprox/strips.hpp"
#include "sqapprox/wave.hpp"

using namespace sqapprox;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  const auto o = run_cli(args);
  EXPECT_EQ(o.code, cli::kSuccess) << o.err;
  return json::parse(o.out);
}

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Cli, SolutionsPythagorean) {
  const auto o = run_cli({"solutions", "--x", "1,1", "--psi", "pow:5", "--hmax", "5"});
  ASSERT_EQ(o.code, cli::kSuccess) << o.err;
  EXPECT_NE(o.out.find("\n4,3,4,5,0\n"), std::string::npos) << o.out;
}

TEST(Cli, SolutionsMatchLibrary) {
  const auto j = run_json({"solutions", "--x", "0.3,0.7", "--psi", "pow:0.5", "--hmax", "12"});
  const auto expected = solutions_at_point(std::vector<double>{0.3, 0.7}, ApproxFunction::power_law(0.5), 12);
  ASSERT_EQ(j["rows"].size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(j["rows"][i][0].get<Int>(), expected[i].a.height());
    EXPECT_EQ(j["rows"][i][1].get<Int>(), expected[i].a[0]);
    EXPECT_EQ(j["rows"][i][2].get<Int>(), expected[i].a[1]);
    EXPECT_EQ(j["rows"][i][3].get<Int>(), expected[i].c);
    EXPECT_EQ(j["rows"][i][4].get<double>(), expected[i].residual);
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"solutions", "--x", "0.3", "--psi", "pow:1", "--hmax", "4"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"solutions", "--x", "0.3,zz", "--psi", "pow:1", "--hmax", "4"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"dichotomy", "--psi", "pow:2", "--n", "2", "--s", "2.5"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"dichotomy", "--psi", "nonsense"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"measure", "--a", "3,2", "--res", "100"}).code, cli::kUsage);
}

TEST(Cli, DichotomyBasel) {
  const auto j = run_json({"dichotomy", "--psi", "pow:2", "--n", "2", "--H", "65536"});
  const double final_sum = j["results"]["final_sum"].get<double>();
  EXPECT_NEAR(final_sum, std::numbers::pi * std::numbers::pi / 6.0, 1e-4);
  EXPECT_EQ(final_sum, khintchine_sum(ApproxFunction::power_law(2), 2, 65536).partial_sums.back().sum);
  EXPECT_EQ(j["results"]["verdict"], "Converging");
  EXPECT_EQ(j["schema_version"], cli::kSchemaVersion);
}

TEST(Cli, DichotomyHarmonicAndHausdorff) {
  EXPECT_EQ(run_json({"dichotomy", "--psi", "pow:1", "--n", "2"})["results"]["verdict"], "Diverging");
  EXPECT_EQ(run_json({"dichotomy", "--psi", "pow:2", "--s", "1.8"})["results"]["verdict"], "Converging");
}

TEST(Cli, ScanFindsPythagoreanResonance) {
  const auto o = run_cli({"scan", "--deltas", "1,1", "--hmax", "5", "--C", "1", "--w", "2"});
  ASSERT_EQ(o.code, cli::kSuccess) << o.err;
  EXPECT_NE(o.out.find("\n4,3,4,5,0,"), std::string::npos) << o.out;
  const auto j = run_json({"scan", "--deltas", "1,1", "--hmax", "5"});
  EXPECT_TRUE(j["results"]["exact"].get<bool>());
  EXPECT_EQ(j["results"]["count"].get<std::size_t>(),
            resonance_scan(WaveParams::from_deltas({ExactReal(Rational(1)), ExactReal(Rational(1))}), {1.0, 2.0, 5})
                .size());
}

TEST(Cli, WaveSolveMatchesLibraryAndMapsResonance) {
  const auto field = temp_file("sqapprox_field.jsonl",
                               "{\"a\":[1,0],\"b\":1,\"re\":1,\"im\":0}\n{\"a\":[-1,0],\"b\":-1,\"re\":1,\"im\":0}\n");
  const auto j = run_json({"wave-solve", "--deltas", "2,1", "--field", field});
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0][3].get<double>(), 1.0 / (4.0 * std::numbers::pi * std::numbers::pi));
  EXPECT_TRUE(j["results"]["hermitian"].get<bool>());

  const auto resonant = temp_file("sqapprox_resonant.jsonl", "{\"a\":[3,4],\"b\":5,\"re\":1,\"im\":0}\n");
  EXPECT_EQ(run_cli({"wave-solve", "--deltas", "1,1", "--field", resonant}).code, cli::kResonance);
  const auto mean = temp_file("sqapprox_mean.jsonl", "{\"a\":[0,0],\"b\":0,\"re\":1,\"im\":0}\n");
  EXPECT_EQ(run_cli({"wave-solve", "--deltas", "1,1", "--field", mean}).code, cli::kResonance);
  EXPECT_EQ(run_cli({"wave-solve", "--deltas", "1,1", "--field", "/nonexistent.jsonl"}).code, cli::kUsage);

  const auto params = temp_file("sqapprox_params.json", "{\"alphas\": [2, 1], \"beta\": 1}");
  const auto p = run_json({"wave-solve", "--params", params, "--field", field});
  EXPECT_EQ(p["config"]["params"]["deltas"][0], json({{"num", 1}, {"den", 4}}));
}

TEST(Cli, MeasureMatchesLibrary) {
  const auto j = run_json({"measure", "--a", "64,45", "--res", "512", "--rule", "rows"});
  GridSpec g;
  g.resolution = 512;
  g.rule = SampleRule::rows();
  const auto s = union_measure_over_c(CoeffVector({64, 45}), ApproxFunction::power_law(1.2), Ball::standard(2), g);
  EXPECT_EQ(j["results"]["estimate"].get<double>(), s.estimate.value);
  EXPECT_TRUE(j["results"]["within"].get<bool>());
}

TEST(Cli, StrictTurnsWarningsIntoExitFour) {
  const std::vector<std::string> args{"measure", "--a", "3,2", "--psi", "pow:1*1e-9", "--res", "64"};
  const auto relaxed = run_cli(args);
  EXPECT_EQ(relaxed.code, cli::kSuccess);
  EXPECT_NE(relaxed.err.find("warning"), std::string::npos);
  auto strict = args;
  strict.push_back("--strict");
  EXPECT_EQ(run_cli(strict).code, cli::kWarning);
}

TEST(Cli, SeededRunsAreByteIdentical) {
  const std::vector<std::string> args{"measure", "--sample", "3", "--hrange", "16:64", "--res", "256", "--rule",
                                      "rows",    "--seed",   "9"};
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  ASSERT_EQ(first.code, cli::kSuccess) << first.err;
  EXPECT_EQ(first.out, second.out);
  auto other = args;
  other.back() = "10";
  EXPECT_NE(run_cli(other).out, first.out);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::vector<std::string> args{"bc", "--H", "16", "--res", "128", "--rule", "rows"};
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(run_cli(args).out, run_cli(threaded).out);
}

TEST(Cli, ConfigFileFillsDefaultsAndFlagsOverride) {
  const auto cfg = temp_file("sqapprox_cfg.json", "{\"H\": 1024, \"format\": \"json\"}");
  const auto from_config = json::parse(run_cli({"dichotomy", "--psi", "pow:2", "--config", cfg}).out);
  EXPECT_EQ(from_config["config"]["H"], 1024);
  const auto overridden = json::parse(run_cli({"dichotomy", "--psi", "pow:2", "--config", cfg, "--H", "64"}).out);
  EXPECT_EQ(overridden["config"]["H"], 64);
  EXPECT_EQ(run_cli({"dichotomy", "--psi", "pow:2", "--config", "/nonexistent.json"}).code, cli::kUsage);
}

TEST(Cli, OutputFileAndCsvLayout) {
  const auto path = (std::filesystem::temp_directory_path() / "sqapprox_out.csv").string();
  const auto o = run_cli({"dichotomy", "--psi", "pow:2", "--H", "8", "--output", path});
  ASSERT_EQ(o.code, cli::kSuccess);
  EXPECT_TRUE(o.out.empty());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# config: ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "H,sum");
  std::getline(in, line);
  EXPECT_EQ(line, "1,1");
}

TEST(Cli, BoxdimReportsSlope) {
  const auto j = run_json({"boxdim", "--psi", "pow:2", "--window", "4:32", "--res", "16:128"});
  EXPECT_TRUE(j["results"].contains("slope"));
  EXPECT_EQ(j["rows"].size(), 4u);
}

TEST(Cli, FormatDouble) {
  EXPECT_EQ(cli::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(cli::format_double(2.0), "2");
}
