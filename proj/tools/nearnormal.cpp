// nearnormal: nearby normal matrices from the command line.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "nearnormal/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = nearnormal::cli;
  CLI::App app{"Nearby normal matrices and commuting Hermitian pairs"};
  app.require_subcommand(1);

  cli::ApproximateArgs approx;
  auto* c_approx = app.add_subcommand("approximate", "Approximate one matrix by a normal matrix");
  c_approx->add_option("input", approx.input, "Matrix file")->required();
  c_approx->add_option("--epsilon", approx.epsilon, "Scaling target epsilon")->capture_default_str();
  c_approx->add_flag("--force", approx.force, "Downgrade gate and margin failures to warnings");
  c_approx->add_option("--emit-matrix", approx.emit_matrix, "Write A' to this matrix file");
  c_approx->add_option("--out", approx.out, "Write the run record here instead of standard output");

  cli::EnsembleArgs ens;
  ens.jobs = cli::default_jobs(std::getenv("NEARNORMAL_JOBS"));
  std::vector<long> dims(ens.spec.dims.begin(), ens.spec.dims.end());
  auto* c_ens = app.add_subcommand("ensemble", "Run the seeded Hermitian pair ensemble");
  c_ens->add_option("--dims", dims, "Dimensions, comma separated")->delimiter(',')->capture_default_str();
  c_ens->add_option("--scales", ens.spec.scales, "Commutator scales, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  c_ens->add_option("--trials", ens.spec.trials, "Trials per cell")->capture_default_str();
  c_ens->add_option("--seed", ens.spec.seed, "Master seed")->capture_default_str();
  c_ens->add_option("--csv", ens.csv, "CSV output path (default standard output)");
  c_ens->add_option("--records", ens.records, "Line-delimited run records");
  c_ens->add_flag("--resume", ens.resume, "Skip trials already present in --records");
  c_ens->add_option("--jobs", ens.jobs, "Worker threads (default NEARNORMAL_JOBS or 1)")->capture_default_str();
  c_ens->add_flag("--no-oracle", [&](std::int64_t) { ens.oracle = false; }, "Leave the oracle column blank");
  c_ens->add_option("--restarts", ens.restarts, "Oracle restarts")->capture_default_str();
  c_ens->add_flag("--timing", ens.timing, "Fill runtime_ms (output no longer byte-reproducible)");
  c_ens->add_option("--epsilon", ens.epsilon, "Scaling target epsilon")->capture_default_str();
  c_ens->add_flag("--force", ens.force, "Downgrade gate and margin failures to warnings");

  cli::OracleArgs orc;
  auto* c_orc = app.add_subcommand("oracle", "Compare oracle, Schur baseline, lower bound and pipeline");
  c_orc->add_option("input", orc.input, "Matrix file (n <= 4)")->required();
  c_orc->add_option("--restarts", orc.restarts, "Oracle restarts")->capture_default_str();

  cli::DemoArgs demo;
  auto* c_demo = app.add_subcommand("demo", "Stage trace of a named example");
  c_demo->add_option("--case", demo.name, "jordan | pauli | lattice-idempotent")->required();
  c_demo->add_option("--n", demo.n, "Dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*c_approx) return cli::cmd_approximate(approx, std::cout, std::cerr);
  if (*c_ens) {
    ens.spec.dims.assign(dims.begin(), dims.end());
    if (ens.jobs < 1) {
      std::cerr << "error: --jobs must be positive\n";
      return 1;
    }
    return cli::cmd_ensemble(ens, std::cout, std::cerr);
  }
  if (*c_orc) return cli::cmd_oracle(orc, std::cout, std::cerr);
  return cli::cmd_demo(demo, std::cout, std::cerr);
}
