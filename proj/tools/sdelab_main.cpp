// Command-line front end: subcommand dispatch, config loading, deterministic
// run manifests. Exit codes: 0 success, 2 invalid config, 3 numeric failure.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "sdelab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for interacting Brownian particles with "
               "singular attracting drifts"};
  app.require_subcommand(1);

  std::string config_path, outdir = "out", d_range = "3:4", n_range = "2:3",
              manifest_path;
  bool variational = false;
  int workers = 0;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value with [tables])")
        ->required();
    sub->add_option("--out-dir", outdir, "output directory");
    sub->add_option("--workers", workers, "worker threads (0 = SDELAB_WORKERS or hardware)");
  };

  add_config(app.add_subcommand("simulate", "run a particle ensemble"));
  add_config(app.add_subcommand("scan-kappa", "ensemble statistics over an attraction grid"));
  add_config(app.add_subcommand("uniqueness", "compare two regularization families"));
  add_config(app.add_subcommand("bessel-check", "exact/euler squared-Bessel estimators"));
  add_config(app.add_subcommand("norms", "drift-size functionals on a ball grid"));

  auto* hardy = app.add_subcommand("hardy-bounds", "bound table for the pair-singularity constant");
  hardy->add_option("--d-range", d_range, "single-particle dimensions, lo:hi");
  hardy->add_option("--n-range", n_range, "particle counts, lo:hi");
  hardy->add_flag("--variational", variational, "add the variational upper estimate (N <= 3)");
  hardy->add_option("--out-dir", outdir, "output directory");

  auto* replay = app.add_subcommand("replay", "re-run a manifest byte-identically");
  replay->add_option("--manifest", manifest_path, "manifest.json from a previous run")->required();
  replay->add_option("--out-dir", outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    sdelab::RunArtifacts art;
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "hardy-bounds") {
      art = sdelab::run_hardy_bounds(d_range, n_range, variational, outdir);
    } else if (sub == "replay") {
      art = sdelab::run_from_manifest(manifest_path, outdir);
    } else {
      std::string text = sdelab::read_text_file(config_path);
      if (workers > 0) text += "\n[sim]\nworkers = " + std::to_string(workers) + "\n";
      art = sdelab::dispatch(sub, text, outdir);
    }
    std::printf("wrote %s\n", art.csv_path.c_str());
    std::printf("wrote %s\n", art.summary_path.c_str());
    std::printf("wrote %s\n", art.manifest_path.c_str());
    return 0;
  } catch (const sdelab::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sdelab::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const sdelab::ConfigInvalid& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
}
