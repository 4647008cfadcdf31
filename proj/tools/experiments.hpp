#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlllab/game_model.hpp"
#include "nlllab/nll_finite.hpp"

namespace nlllab::cli {

enum class OutputFormat { Csv, Json };

struct ScanConfig {
  double sigma2 = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  int steps = 0;
  int mesh = 10000;
  double mu0 = 0.5;
};

/// One experiment, parsed from a JSON file.
struct RunConfig {
  std::string experiment;
  std::optional<GameSpec> game;
  std::optional<double> h;
  std::optional<int> K;
  std::optional<double> T;
  std::optional<int> N;
  std::vector<int> N_list;
  std::vector<int> K_list;
  int resolution = 0;  // 0 = default for d
  FixedPointOptions solver;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> mu0;
  int t0 = 0;
  int starts = 0;
  ScanConfig scan;
  int cts_M = 4000;
  std::optional<std::filesystem::path> artifact;
  std::filesystem::path output_dir = "out";
  std::uint64_t fingerprint = 0;

  /// h and K from any two of (h, K, T); ConfigError if missing or inconsistent.
  TimeGrid time_grid() const;
};

/// `experiment` is the sub-command; a config naming a different kind is a
/// ConfigError. Relative paths are resolved against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::string& experiment,
                       const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path, const std::string& experiment);

struct RunContext {
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  OutputFormat format = OutputFormat::Csv;
};

/// Each command writes its outputs and manifest.json into ctx.out_dir and
/// returns the manifest.
nlohmann::json cmd_solve_n(const RunConfig& cfg, const RunContext& ctx);
nlohmann::json cmd_solve_mf(const RunConfig& cfg, const RunContext& ctx);
nlohmann::json cmd_scan_onestep(const RunConfig& cfg, const RunContext& ctx);
nlohmann::json cmd_converge_n(const RunConfig& cfg, const RunContext& ctx);
nlohmann::json cmd_converge_h(const RunConfig& cfg, const RunContext& ctx);
nlohmann::json cmd_verify(const RunConfig& cfg, const RunContext& ctx);

nlohmann::json run_experiment(const RunConfig& cfg, const RunContext& ctx);

/// Process exit code for an exception: 2 config/integrity, 3 non-convergence,
/// 4 size cap, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace nlllab::cli
