#include "experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <variant>

#include "nlllab/artifact.hpp"
#include "nlllab/cts_reference.hpp"
#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"
#include "nlllab/nll_mean_field.hpp"
#include "nlllab/onestep_example.hpp"
#include "nlllab/transition_kernel.hpp"
#include "nlllab/version.hpp"

namespace nlllab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_table(const Table& t, const fs::path& stem, OutputFormat fmt, json& manifest) {
  const fs::path path = stem.string() + (fmt == OutputFormat::Csv ? ".csv" : ".json");
  {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    if (fmt == OutputFormat::Csv) {
      out << std::setprecision(17);
      for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
      out << "\n";
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i) out << ",";
          std::visit([&](const auto& v) { out << v; }, row[i]);
        }
        out << "\n";
      }
    } else {
      json j;
      j["columns"] = t.columns;
      j["rows"] = json::array();
      for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& c : row) std::visit([&](const auto& v) { r.push_back(v); }, c);
        j["rows"].push_back(std::move(r));
      }
      out << j.dump(1) << "\n";
    }
  }
  manifest["artifacts"].push_back({{"path", path.filename().string()}, {"fnv1a", hex64(file_hash(path))}});
}

json report_json(const FixedPointReport& r) {
  return {{"step", r.step},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"contraction_estimate", r.contraction_estimate},
          {"contractive", r.contractive},
          {"L_phi", r.L_phi},
          {"damped", r.damped}};
}

json new_manifest(const RunConfig& cfg) {
  json m;
  m["experiment"] = cfg.experiment;
  m["config_fingerprint"] = hex64(cfg.fingerprint);
  m["library_version"] = kVersion;
  m["artifacts"] = json::array();
  m["reports"] = json::array();
  return m;
}

void finish_manifest(json& m, const RunContext& ctx,
                     std::chrono::steady_clock::time_point start) {
  m["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(ctx.out_dir / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest in " + ctx.out_dir.string());
  out << m.dump(2) << "\n";
}

void add_artifact(json& m, const fs::path& path) {
  m["artifacts"].push_back({{"path", path.filename().string()}, {"fnv1a", hex64(file_hash(path))}});
}

const GameSpec& need_game(const RunConfig& cfg) {
  if (!cfg.game) throw ConfigError(cfg.experiment + " needs 'game' or 'game_file'");
  return *cfg.game;
}

int need_N(const RunConfig& cfg) {
  if (!cfg.N) throw ConfigError(cfg.experiment + " needs 'N'");
  return *cfg.N;
}

FixedPointOptions solver_options(const RunConfig& cfg, const RunContext& ctx) {
  FixedPointOptions opt = cfg.solver;
  opt.workers = ctx.workers;
  opt.seed = ctx.seed;
  return opt;
}

void export_artifact(const Artifact& a, const fs::path& stem, json& m) {
  const fs::path bin = stem.string() + ".bin";
  save_artifact(a, bin);
  // Round-trip before listing the artifact.
  const Artifact back = load_artifact(bin);
  if (back.value != a.value || back.policy != a.policy) {
    throw IntegrityError("artifact " + bin.string() + " does not round-trip");
  }
  add_artifact(m, bin);
  const fs::path csv = stem.string() + ".csv";
  std::ofstream out(csv);
  if (!out) throw ConfigError("cannot write " + csv.string());
  write_artifact_csv(out, a);
  out.close();
  add_artifact(m, csv);
}

}  // namespace

TimeGrid RunConfig::time_grid() const {
  if (h && K) {
    if (T && std::abs(*h * *K - *T) > 1e-12 * std::max(1.0, *T)) {
      throw ConfigError("h * K differs from T");
    }
    return TimeGrid(*h, *K);
  }
  if (T && K) {
    if (*K == 0) return TimeGrid(1.0, 0);
    return TimeGrid(*T / *K, *K);
  }
  if (T && h) {
    const double steps = *T / *h;
    const long k = std::lround(steps);
    if (std::abs(steps - static_cast<double>(k)) > 1e-9) throw ConfigError("T is not a multiple of h");
    return TimeGrid(*h, static_cast<int>(k));
  }
  throw ConfigError("grid needs two of h, K, T");
}

RunConfig parse_config(const json& j, const std::string& experiment, const fs::path& base_dir) {
  static const std::set<std::string> known = {
      "experiment", "game",   "game_file", "h",     "K",   "T",        "N",
      "N_list",     "K_list", "resolution", "solver", "seed", "mu0",    "t0",
      "starts",     "scan",   "cts",        "artifact", "output_dir"};
  static const std::set<std::string> kinds = {"solve-n",    "solve-mf",   "scan-onestep",
                                              "converge-n", "converge-h", "verify"};
  try {
    if (!j.is_object()) throw ConfigError("config must be a table");
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
    }
    RunConfig cfg;
    cfg.experiment = j.value("experiment", experiment);
    if (!kinds.count(cfg.experiment)) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    if (cfg.experiment != experiment) {
      throw ConfigError("config is for '" + cfg.experiment + "', not '" + experiment + "'");
    }
    if (j.contains("game") && j.contains("game_file")) {
      throw ConfigError("give either 'game' or 'game_file'");
    }
    if (j.contains("game")) cfg.game = spec_from_json(j.at("game"));
    if (j.contains("game_file")) {
      const fs::path p = base_dir / j.at("game_file").get<std::string>();
      if (!fs::exists(p)) throw ConfigError("game_file " + p.string() + " does not exist");
      cfg.game = load_spec(p);
    }
    if (j.contains("h")) cfg.h = j.at("h").get<double>();
    if (j.contains("K")) cfg.K = j.at("K").get<int>();
    if (j.contains("T")) cfg.T = j.at("T").get<double>();
    if (j.contains("N")) cfg.N = j.at("N").get<int>();
    cfg.N_list = j.value("N_list", std::vector<int>{});
    cfg.K_list = j.value("K_list", std::vector<int>{});
    cfg.resolution = j.value("resolution", 0);
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("mu0")) cfg.mu0 = j.at("mu0").get<std::vector<double>>();
    cfg.t0 = j.value("t0", 0);
    cfg.starts = j.value("starts", 0);
    if (j.contains("artifact")) {
      cfg.artifact = base_dir / j.at("artifact").get<std::string>();
    }
    if (j.contains("output_dir")) cfg.output_dir = base_dir / j.at("output_dir").get<std::string>();

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      static const std::set<std::string> skeys = {"eps_fp",    "max_outer", "damping",
                                                  "eps_inner", "max_inner", "init"};
      for (const auto& [key, _] : s.items()) {
        if (!skeys.count(key)) throw ConfigError("unknown solver field '" + key + "'");
      }
      cfg.solver.eps_fp = s.value("eps_fp", cfg.solver.eps_fp);
      cfg.solver.max_outer = s.value("max_outer", cfg.solver.max_outer);
      cfg.solver.damping = s.value("damping", cfg.solver.damping);
      cfg.solver.inner.eps = s.value("eps_inner", cfg.solver.inner.eps);
      cfg.solver.inner.max_iter = s.value("max_inner", cfg.solver.inner.max_iter);
      const std::string init = s.value("init", std::string("reference"));
      if (init == "reference") {
        cfg.solver.init = InitKind::Reference;
      } else if (init == "random") {
        cfg.solver.init = InitKind::Random;
      } else {
        throw ConfigError("solver.init must be 'reference' or 'random'");
      }
    }
    if (!(cfg.solver.eps_fp > 0.0) || !(cfg.solver.inner.eps > 0.0) || cfg.solver.max_outer < 1 ||
        cfg.solver.inner.max_iter < 1 || !(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0)) {
      throw ConfigError("solver tolerances and iteration caps must be positive, damping in (0, 1]");
    }
    if (j.contains("scan")) {
      const json& s = j.at("scan");
      cfg.scan.sigma2 = s.value("sigma2", 0.0);
      cfg.scan.h_min = s.value("h_min", 0.0);
      cfg.scan.h_max = s.value("h_max", 0.0);
      cfg.scan.steps = s.value("steps", 0);
      cfg.scan.mesh = s.value("mesh", 10000);
      cfg.scan.mu0 = s.value("mu0", 0.5);
    }
    if (j.contains("cts")) cfg.cts_M = j.at("cts").value("M", cfg.cts_M);
    cfg.fingerprint = fnv1a64(j.dump());
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, experiment, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

json cmd_solve_n(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec& spec = need_game(cfg);
  const TimeGrid grid = cfg.time_grid();
  const FixedPointOptions opt = solver_options(cfg, ctx);
  json m = new_manifest(cfg);
  const NllSolution sol = solve_nll(spec, grid, need_N(cfg), opt);
  for (const auto& r : sol.reports) m["reports"].push_back(report_json(r));
  export_artifact(make_artifact(spec, sol, opt), ctx.out_dir / "solution", m);
  m["results"] = {{"N", sol.N}, {"h", grid.h}, {"K", grid.K}, {"nodes", sol.lattice().size()}};
  finish_manifest(m, ctx, start);
  return m;
}

json cmd_solve_mf(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec& spec = need_game(cfg);
  const TimeGrid grid = cfg.time_grid();
  const FixedPointOptions opt = solver_options(cfg, ctx);
  const int R = cfg.resolution > 0 ? cfg.resolution : default_resolution(spec.d);
  json m = new_manifest(cfg);
  const MFSolution sol = solve_mf_nll(spec, grid, std::make_shared<const SimplexLattice>(R, spec.d), opt);
  for (const auto& r : sol.reports) m["reports"].push_back(report_json(r));
  export_artifact(make_artifact(spec, sol, opt), ctx.out_dir / "mf_solution", m);
  m["results"] = {{"resolution", R}, {"h", grid.h}, {"K", grid.K}, {"nodes", sol.lattice->size()}};

  if (cfg.mu0) {
    const MeasureFlow flow = mfg_flow(spec, sol, cfg.t0, *cfg.mu0);
    Table t;
    t.columns = {"s"};
    for (int j = 0; j < spec.d; ++j) t.columns.push_back("mu_" + std::to_string(j));
    for (std::size_t i = 0; i < flow.mu.size(); ++i) {
      std::vector<Cell> row{grid.time(cfg.t0 + static_cast<int>(i))};
      for (double v : flow.mu[i]) row.emplace_back(v);
      t.rows.push_back(std::move(row));
    }
    write_table(t, ctx.out_dir / "flow", ctx.format, m);
    m["results"]["flow_policy_fingerprint"] = hex64(flow.policy_fingerprint);

    if (cfg.starts > 0) {
      std::mt19937_64 rng(ctx.seed);
      const MfgSystemResult sys = solve_mfg_system(spec, grid, cfg.t0, *cfg.mu0, cfg.starts, rng);
      Table e;
      e.columns = {"equilibrium", "s"};
      for (int j = 0; j < spec.d; ++j) e.columns.push_back("mu_" + std::to_string(j));
      for (std::size_t q = 0; q < sys.equilibria.size(); ++q) {
        const auto& eq = sys.equilibria[q];
        for (std::size_t i = 0; i < eq.mu.size(); ++i) {
          std::vector<Cell> row{static_cast<long long>(q), grid.time(cfg.t0 + static_cast<int>(i))};
          for (double v : eq.mu[i]) row.emplace_back(v);
          e.rows.push_back(std::move(row));
        }
      }
      write_table(e, ctx.out_dir / "equilibria", ctx.format, m);
      m["results"]["equilibria"] = sys.equilibria.size();
      m["results"]["dropped_starts"] = sys.dropped;
    }
  }
  finish_manifest(m, ctx, start);
  return m;
}

json cmd_scan_onestep(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const ScanConfig& s = cfg.scan;
  json m = new_manifest(cfg);
  Table counts, roots;
  counts.columns = {"h", "count", "roots"};
  roots.columns = {"h", "root", "residual"};
  const int steps = s.h_max < s.h_min ? 0 : s.steps;
  for (int i = 0; i < steps; ++i) {
    const double h = steps == 1 ? s.h_min : s.h_min + (s.h_max - s.h_min) * i / (steps - 1);
    const OneStepScan scan = scan_equilibria_onestep(s.sigma2, h, s.mesh, s.mu0);
    std::ostringstream joined;
    joined << std::setprecision(17);
    for (std::size_t r = 0; r < scan.roots.size(); ++r) {
      joined << (r ? ";" : "") << scan.roots[r];
      roots.rows.push_back({h, scan.roots[r], scan.residuals[r]});
    }
    for (const auto& [a, b] : scan.intervals) {
      joined << (joined.tellp() > 0 ? ";" : "") << a << ".." << b;
    }
    counts.rows.push_back({h, static_cast<long long>(scan.count()), joined.str()});
  }
  write_table(counts, ctx.out_dir / "scan", ctx.format, m);
  write_table(roots, ctx.out_dir / "scan_roots", ctx.format, m);
  if (s.sigma2 > 0.0 && s.sigma2 < 3.0 - 2.0 * std::sqrt(2.0)) {
    const auto [lo, hi] = critical_steps(s.sigma2);
    m["results"] = {{"h_low", lo}, {"h_high", hi}};
  }
  finish_manifest(m, ctx, start);
  return m;
}

json cmd_converge_n(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec& spec = need_game(cfg);
  const TimeGrid grid = cfg.time_grid();
  const FixedPointOptions opt = solver_options(cfg, ctx);
  if (cfg.N_list.empty()) throw ConfigError("converge-n needs 'N_list'");
  const int R = cfg.resolution > 0 ? cfg.resolution : default_resolution(spec.d);
  json m = new_manifest(cfg);
  const MFSolution mf = solve_mf_nll(spec, grid, std::make_shared<const SimplexLattice>(R, spec.d), opt);
  for (const auto& r : mf.reports) m["reports"].push_back(report_json(r));

  Table t;
  t.columns = {"N", "err_value", "err_policy"};
  for (int N : cfg.N_list) {
    const NllSolution fin = solve_nll(spec, grid, N, opt);
    double ev = 0.0, ep = 0.0;
    const SimplexLattice& lat = fin.lattice();
    for (std::size_t node = 0; node < lat.size(); ++node) {
      const auto z = lat.point(node);
      for (int k = 0; k <= grid.K; ++k) {
        for (int x = 0; x < spec.d; ++x) {
          ev = std::max(ev, std::abs(fin.value[static_cast<std::size_t>(k)](x, node) - mf.value_at(k, x, z)));
        }
        if (k == grid.K) continue;
        const auto rows = mf.policy_at(spec, k, z);
        for (int x = 0; x < spec.d; ++x) {
          ep = std::max(ep, l1_distance(fin.policy[static_cast<std::size_t>(k)].row(x, node),
                                        rows[static_cast<std::size_t>(x)]));
        }
      }
    }
    t.rows.push_back({static_cast<long long>(N), ev, ep});
  }
  write_table(t, ctx.out_dir / "converge_n", ctx.format, m);
  m["results"] = {{"resolution", R}};
  finish_manifest(m, ctx, start);
  return m;
}

json cmd_converge_h(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec& spec = need_game(cfg);
  if (!cfg.T) throw ConfigError("converge-h needs 'T'");
  if (cfg.K_list.empty()) throw ConfigError("converge-h needs 'K_list'");
  const FixedPointOptions opt = solver_options(cfg, ctx);
  json m = new_manifest(cfg);
  CtsOptions copt;
  copt.M = cfg.cts_M;
  copt.workers = ctx.workers;
  const CtsSolution ref = solve_cts_nll(spec, need_N(cfg), *cfg.T, copt);
  const auto rows = compare_discrete_to_cts(spec, need_N(cfg), *cfg.T, cfg.K_list, ref, opt);
  Table t;
  t.columns = {"K", "h", "err_value", "err_rate"};
  for (const auto& r : rows) t.rows.push_back({static_cast<long long>(r.K), r.h, r.err_value, r.err_rate});
  write_table(t, ctx.out_dir / "converge_h", ctx.format, m);
  m["results"] = {{"M", copt.M}};
  finish_manifest(m, ctx, start);
  return m;
}

json cmd_verify(const RunConfig& cfg, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const GameSpec& spec = need_game(cfg);
  if (!cfg.artifact) throw ConfigError("verify needs 'artifact'");
  const Artifact a = load_artifact(*cfg.artifact);
  if (a.header.kind != ArtifactKind::FinitePlayer) {
    throw ConfigError("verify expects a finite-player artifact");
  }
  if (a.header.spec_fingerprint != spec_fingerprint(spec)) {
    throw IntegrityError("artifact was produced for a different game spec");
  }
  if (a.header.d != spec.d) throw IntegrityError("artifact dimension differs from the game");
  FixedPointOptions opt = solver_options(cfg, ctx);
  opt.inner.eps = a.header.eps_inner;
  const TimeGrid grid(a.header.h, a.header.K);
  const TransitionKernel kernel(a.header.resolution, spec.d);
  LawCache cache = LawCache::from_env();
  const EquilibriumCheck chk = verify_equilibrium(spec, grid, kernel, a.policy, opt, &cache);
  json m = new_manifest(cfg);
  m["results"] = {{"gap", chk.gap},
                  {"artifact", cfg.artifact->string()},
                  {"artifact_fnv1a", hex64(file_hash(*cfg.artifact))},
                  {"law_cache_hits", cache.hits()},
                  {"law_cache_misses", cache.misses()}};
  finish_manifest(m, ctx, start);
  return m;
}

json run_experiment(const RunConfig& cfg, const RunContext& ctx) {
  fs::create_directories(ctx.out_dir);
  if (cfg.experiment == "solve-n") return cmd_solve_n(cfg, ctx);
  if (cfg.experiment == "solve-mf") return cmd_solve_mf(cfg, ctx);
  if (cfg.experiment == "scan-onestep") return cmd_scan_onestep(cfg, ctx);
  if (cfg.experiment == "converge-n") return cmd_converge_n(cfg, ctx);
  if (cfg.experiment == "converge-h") return cmd_converge_h(cfg, ctx);
  if (cfg.experiment == "verify") return cmd_verify(cfg, ctx);
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IntegrityError*>(&e) ||
      dynamic_cast<const FeasibilityError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const SolverError*>(&e)) return 3;
  if (dynamic_cast<const SizeError*>(&e)) return 4;
  return 1;
}

}  // namespace nlllab::cli
