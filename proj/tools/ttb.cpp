// Command-line front-end: selftest | verify | bound | sample.

#include <iostream>

#include <CLI11.hpp>

#include "ttb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tensor tail-bound calculator and Monte Carlo verifier"};
  app.require_subcommand(1);

  ttb::SelftestOptions st;
  bool selftest_json = false;
  auto* selftest = app.add_subcommand("selftest", "Run the algebra and spectral property suites");
  selftest->add_option("--seed", st.seed, "Seed for the random instances");
  selftest->add_flag("--json", selftest_json, "Print results as JSON");

  ttb::RunOptions run;
  std::string config;
  std::optional<unsigned> workers;
  auto* verify = app.add_subcommand("verify", "Check every configured bound by Monte Carlo");
  verify->add_option("--config", config, "Experiment config (JSON)")->required();
  verify->add_option("--seed", run.seed, "Override the config seed");
  verify->add_option("--trials", run.trials, "Override the trial count");
  verify->add_option("--workers", workers, "Worker threads (default: $TTB_WORKERS or all cores)");
  verify->add_option("--out-dir", run.out_dir, "Directory for CSV and JSON reports");
  verify->add_flag("--json", run.json, "Print the JSON report on stdout");
  verify->add_flag("--dry-run", run.dry_run, "Print the pairing plan without sampling");

  ttb::BoundArgs ba;
  std::string tag;
  bool bound_json = false;
  auto* bound = app.add_subcommand("bound", "Evaluate a closed-form bound");
  bound->add_option("theorem", tag, "Theorem tag, or chernoff-expectation | subexp-expectation | sandwich")
      ->required();
  bound->add_option("--dims", ba.dims, "Row dims I_1,...,I_M")->delimiter(',');
  bound->add_option("--col-dims", ba.col_dims, "Column dims (rectangular, nonuniform-gaussian)")
      ->delimiter(',');
  bound->add_option("--sigma2", ba.sigma_sq, "Total variance sigma^2");
  bound->add_option("--T", ba.T, "Uniform bound T");
  bound->add_option("--n", ba.n, "Number of summands");
  bound->add_option("--mu-max", ba.mu_max, "lambda_max of the summed means");
  bound->add_option("--mu-min", ba.mu_min, "lambda_min of the summed means");
  bound->add_option("--mu-bar-max", ba.mu_bar_max, "Averaged mu_max");
  bound->add_option("--mu-bar-min", ba.mu_bar_min, "Averaged mu_min");
  bound->add_option("--regime", ba.regime, "Bernstein regime: general | auto | small | large");
  bound->add_option("--mgf", ba.mgf, "master: gaussian | bounded");
  bound->add_option("--theta", ba.thetas, "Threshold(s)")->delimiter(',');
  bound->add_flag("--json", bound_json, "Print JSON");

  ttb::RunOptions sample_opts;
  std::string sample_config, ensemble;
  auto* sample = app.add_subcommand("sample", "Dump raw draws of a configured ensemble");
  sample->add_option("--config", sample_config, "Experiment config (JSON)")->required();
  sample->add_option("--ensemble", ensemble, "Ensemble name (default: the first)");
  sample->add_option("--trials", sample_opts.trials, "Number of draws (default 10)");
  sample->add_option("--seed", sample_opts.seed, "Override the config seed");
  sample->add_option("--out-dir", sample_opts.out_dir, "Write binary tensor pairs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ttb::kExitUsage;
  }

  if (*selftest) return ttb::cmd_selftest(st, selftest_json, std::cout);
  if (*verify) {
    run.workers = workers;
    return ttb::cmd_verify(config, run, std::cout, std::cerr);
  }
  if (*bound) return ttb::cmd_bound(tag, ba, bound_json, std::cout, std::cerr);
  if (*sample) return ttb::cmd_sample(sample_config, ensemble, sample_opts, std::cout, std::cerr);
  return ttb::kExitUsage;
}
