#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "experiments.hpp"
#include "nlllab/artifact.hpp"
#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"

using namespace nlllab;
using namespace nlllab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_game() {
  return {{"d", 2}, {"sigma2", 0.1}, {"cost", {{"kind", "quadratic"}, {"params", {{"c", 1.0}}}}}};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlllab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(ParseConfig, UnknownKeysAndWrongExperiment) {
  EXPECT_THROW(parse_config({{"game", small_game()}, {"h", 0.1}, {"colour", 2}}, "solve-n", "."), ConfigError);
  EXPECT_THROW(parse_config({{"experiment", "solve-mf"}}, "solve-n", "."), ConfigError);
  EXPECT_THROW(parse_config({{"solver", {{"tolerance", 1}}}}, "solve-n", "."), ConfigError);
  EXPECT_THROW(parse_config({{"solver", {{"damping", 0.0}}}}, "solve-n", "."), ConfigError);
  EXPECT_THROW(parse_config({{"h", "large"}}, "solve-n", "."), ConfigError);
  EXPECT_THROW(parse_config({{"game_file", "missing.json"}}, "solve-n", "."), ConfigError);
}

TEST(ParseConfig, TimeGridFromAnyTwo) {
  EXPECT_DOUBLE_EQ(parse_config({{"h", 0.1}, {"K", 5}}, "solve-n", ".").time_grid().T(), 0.5);
  EXPECT_EQ(parse_config({{"T", 0.5}, {"h", 0.1}}, "solve-n", ".").time_grid().K, 5);
  EXPECT_DOUBLE_EQ(parse_config({{"T", 1.0}, {"K", 4}}, "solve-n", ".").time_grid().h, 0.25);
  EXPECT_THROW(parse_config({{"T", 0.55}, {"h", 0.1}}, "solve-n", ".").time_grid(), ConfigError);
  EXPECT_THROW(parse_config({{"T", 1.0}, {"h", 0.1}, {"K", 4}}, "solve-n", ".").time_grid(), ConfigError);
  EXPECT_THROW(parse_config({{"h", 0.1}}, "solve-n", ".").time_grid(), ConfigError);
}

TEST(ParseConfig, FingerprintFollowsContent) {
  const auto a = parse_config({{"h", 0.1}, {"K", 5}}, "solve-n", ".");
  const auto b = parse_config({{"K", 5}, {"h", 0.1}}, "solve-n", ".");
  const auto c = parse_config({{"h", 0.1}, {"K", 6}}, "solve-n", ".");
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  EXPECT_NE(a.fingerprint, c.fingerprint);
}

TEST(RunExperiment, SolveThenVerify) {
  const fs::path dir = fresh_dir("solve");
  RunContext ctx;
  ctx.out_dir = dir / "solve";
  ctx.seed = 3;
  ctx.workers = 2;
  const RunConfig cfg = parse_config({{"game", small_game()}, {"h", 0.1}, {"K", 3}, {"N", 3}}, "solve-n", dir);
  const json m = run_experiment(cfg, ctx);
  EXPECT_EQ(m["reports"].size(), 3u);
  EXPECT_TRUE(fs::exists(ctx.out_dir / "manifest.json"));
  ASSERT_EQ(m["artifacts"].size(), 2u);
  EXPECT_EQ(m["artifacts"][0]["path"], "solution.bin");

  RunContext vctx = ctx;
  vctx.out_dir = dir / "verify";
  const RunConfig vcfg =
      parse_config({{"game", small_game()}, {"artifact", "solve/solution.bin"}}, "verify", dir);
  const json v = run_experiment(vcfg, vctx);
  EXPECT_LE(v["results"]["gap"].get<double>(), 1e-9);

  json other = small_game();
  other["sigma2"] = 0.2;
  const RunConfig wrong = parse_config({{"game", other}, {"artifact", "solve/solution.bin"}}, "verify", dir);
  try {
    run_experiment(wrong, vctx);
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_EQ(exit_code_for(e), 2);
  }
  fs::remove_all(dir);
}

TEST(RunExperiment, ScanWritesBothTables) {
  const fs::path dir = fresh_dir("scan");
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.format = OutputFormat::Json;
  const RunConfig cfg = parse_config(
      {{"scan", {{"sigma2", 0.05}, {"h_min", 1.0}, {"h_max", 9.0}, {"steps", 9}}}}, "scan-onestep", dir);
  const json m = run_experiment(cfg, ctx);
  std::ifstream in(dir / "scan.json");
  const json table = json::parse(in);
  EXPECT_EQ(table["columns"], json({"h", "count", "roots"}));
  ASSERT_EQ(table["rows"].size(), 9u);
  EXPECT_EQ(table["rows"][0][1], 1);
  EXPECT_EQ(table["rows"][4][1], 5);
  EXPECT_TRUE(fs::exists(dir / "scan_roots.json"));
  EXPECT_NEAR(m["results"]["h_low"].get<double>(), 1.0592363464, 1e-9);
  fs::remove_all(dir);
}

TEST(RunExperiment, ConvergenceTables) {
  const fs::path dir = fresh_dir("conv");
  RunContext ctx;
  ctx.out_dir = dir;
  const RunConfig n = parse_config(
      {{"game", small_game()}, {"h", 0.05}, {"K", 2}, {"N_list", {2, 4}}, {"resolution", 16}}, "converge-n", dir);
  run_experiment(n, ctx);
  EXPECT_TRUE(fs::exists(dir / "converge_n.csv"));
  const RunConfig h = parse_config(
      {{"game", small_game()}, {"T", 0.2}, {"N", 1}, {"K_list", {4, 8}}, {"cts", {{"M", 400}}}}, "converge-h", dir);
  const json m = run_experiment(h, ctx);
  EXPECT_TRUE(fs::exists(dir / "converge_h.csv"));
  EXPECT_EQ(m["results"]["M"], 400);
  fs::remove_all(dir);
}

TEST(ExitCodes, ByErrorKind) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(exit_code_for(FeasibilityError("x")), 2);
  EXPECT_EQ(exit_code_for(SolverError("x")), 3);
  EXPECT_EQ(exit_code_for(SizeError("x")), 4);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}
