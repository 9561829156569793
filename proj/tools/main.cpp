#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfobench/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string run_dir;
  long long seed = -1;
  int workers = -1;
};

void add_common(CLI::App* app, CommonArgs& args) {
  app->add_option("--config", args.config_path, "key = value config file");
  app->add_option("--set", args.overrides,
                  "override a config key, e.g. --set optimizer.alpha=1e-3");
  app->add_option("-o,--out-dir", args.out_dir,
                  "output root (default: $SFOBENCH_OUT_DIR or ./runs)");
  app->add_option("--run-dir", args.run_dir,
                  "exact run directory (skips the timestamped subdirectory)");
  app->add_option("--seed", args.seed, "master seed");
  app->add_option("--workers", args.workers, "concurrent runs inside a sweep");
}

int dispatch(sfo::Subcommand cmd, const CommonArgs& args,
             const std::vector<std::string>& extra_overrides) {
  std::vector<sfo::ConfigError> errors;
  std::string text;
  if (!args.config_path.empty()) {
    std::ifstream is(args.config_path);
    if (!is) {
      std::cerr << "config error: cannot read " << args.config_path << "\n";
      return sfo::cli::kExitConfigError;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  sfo::ParsedConfig parsed = sfo::parse_key_values(text, errors);
  for (const std::string& o : args.overrides)
    sfo::apply_override(parsed, o, errors);
  for (const std::string& o : extra_overrides)
    sfo::apply_override(parsed, o, errors);
  if (args.seed >= 0)
    sfo::apply_override(parsed, "run.seed=" + std::to_string(args.seed),
                        errors);
  if (args.workers > 0)
    sfo::apply_override(parsed, "run.workers=" + std::to_string(args.workers),
                        errors);
  if (!args.out_dir.empty())
    sfo::apply_override(parsed, "run.out_dir=" + args.out_dir, errors);

  sfo::RunConfig config = sfo::resolve_config(parsed, cmd, errors);
  if (!errors.empty()) {
    for (const sfo::ConfigError& e : errors)
      std::cerr << "config error: "
                << (e.key.empty() ? std::string() : e.key + ": ") << e.message
                << "\n";
    return sfo::cli::kExitConfigError;
  }

  try {
    const std::filesystem::path dir =
        sfo::cli::prepare_run_dir(config, args.run_dir);
    switch (cmd) {
      case sfo::Subcommand::Sweep: return sfo::cli::run_sweep(config, dir);
      case sfo::Subcommand::Bounds: return sfo::cli::run_bounds(config, dir);
      case sfo::Subcommand::Fit: return sfo::cli::run_fit(config, dir);
      case sfo::Subcommand::Validate:
        return sfo::cli::run_validate(config, dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return sfo::cli::kExitRuntimeFault;
  }
  return sfo::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sfobench: adaptive-optimizer batch-size sweeps, bound curves, and "
      "trajectory diagnostics"};
  app.require_subcommand(1);

  CommonArgs sweep_args, bounds_args, fit_args, validate_args;

  CLI::App* sweep = app.add_subcommand(
      "sweep", "measure steps-to-threshold and SFO complexity over batch sizes");
  add_common(sweep, sweep_args);

  CLI::App* bounds = app.add_subcommand(
      "bounds", "evaluate closed-form step-bound curves and critical batches");
  add_common(bounds, bounds_args);

  CLI::App* fit = app.add_subcommand(
      "fit", "fit the rational step curve to recorded sweep data");
  std::string records;
  add_common(fit, fit_args);
  fit->add_option("--records", records, "records.csv from a sweep run");

  CLI::App* validate = app.add_subcommand(
      "validate", "run per-rule trajectory identity and assumption checks");
  add_common(validate, validate_args);
  long long steps = -1;
  bool inject_fault = false;
  validate->add_option("--steps", steps, "trajectory length per rule");
  validate->add_flag("--inject-fault", inject_fault,
                     "corrupt one recorded step (detector test hook)");

  CLI11_PARSE(app, argc, argv);

  if (sweep->parsed()) return dispatch(sfo::Subcommand::Sweep, sweep_args, {});
  if (bounds->parsed())
    return dispatch(sfo::Subcommand::Bounds, bounds_args, {});
  if (fit->parsed()) {
    std::vector<std::string> extra;
    if (!records.empty()) extra.push_back("fit.records=" + records);
    return dispatch(sfo::Subcommand::Fit, fit_args, extra);
  }
  std::vector<std::string> extra;
  if (steps >= 0) extra.push_back("validate.steps=" + std::to_string(steps));
  if (inject_fault) extra.push_back("validate.inject_fault=true");
  return dispatch(sfo::Subcommand::Validate, validate_args, extra);
}
