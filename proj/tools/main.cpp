#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "nlllab/error.hpp"
#include "nlllab/version.hpp"

int main(int argc, char** argv) {
  namespace cli = nlllab::cli;
  CLI::App app{"Markov perfect equilibria of finite-state games: solvers and experiments"};
  app.set_version_flag("--version", nlllab::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  std::string format = "csv";
  std::string artifact;

  const char* commands[][2] = {
      {"solve-n", "solve the finite-player equation and export tensors"},
      {"solve-mf", "solve the mean-field equation on a simplex grid"},
      {"scan-onestep", "count one-step equilibria of the two-state example over a range of h"},
      {"converge-n", "finite-player versus mean-field errors over a list of N"},
      {"converge-h", "discrete versus continuous-time errors over a list of K"},
      {"verify", "best-response gap of a stored finite-player solution"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--workers", workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
    if (std::string(name) == "verify") {
      sub->add_option("--artifact", artifact, "artifact to verify (overrides config)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    cli::RunConfig cfg = cli::load_config(config, name);
    if (!artifact.empty()) cfg.artifact = artifact;
    cli::RunContext ctx;
    ctx.out_dir = out.empty() ? cfg.output_dir : std::filesystem::path(out);
    ctx.seed = seed_given ? seed : cfg.seed;
    ctx.workers = workers;
    ctx.format = format == "json" ? cli::OutputFormat::Json : cli::OutputFormat::Csv;
    const auto manifest = cli::run_experiment(cfg, ctx);
    if (manifest.contains("results")) std::cout << manifest["results"].dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
