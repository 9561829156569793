#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sfobench/optimizer.hpp"
#include "sfobench/problem.hpp"

namespace sfo {

enum class Subcommand { Sweep, Bounds, Fit, Validate };

std::string to_string(Subcommand c);

struct ConfigError {
  std::string key;      // empty for syntax-level errors
  std::string message;
};

// Flat `key = value` assignments. Sections ([problem], [optimizer], ...)
// prefix the keys that follow; bare keys resolve by unique suffix against
// the registry. Assignments separate by newline or comma; `#` starts a
// comment. Values never carry quotes.
struct ParsedConfig {
  std::map<std::string, std::string> values;  // canonical full keys
};

ParsedConfig parse_key_values(const std::string& text,
                              std::vector<ConfigError>& errors);

// Applies one `key=value` override (CLI flags) with the same resolution
// rules as the file format.
void apply_override(ParsedConfig& config, const std::string& assignment,
                    std::vector<ConfigError>& errors);

// Fully-typed, validated run configuration.
struct RunConfig {
  Subcommand cmd = Subcommand::Validate;

  // problem
  std::string problem_kind = "noisy-quadratic";
  int dimension = 2;
  double sigma2 = 0.0;
  double theta0_fill = 1.0;
  int mlp_samples = 128;
  int mlp_inputs = 4;
  int mlp_hidden = 8;
  std::uint64_t data_seed = 7;

  // optimizer
  std::string rule_name = "sgd";
  HyperParams hyper;
  double bound_scale = 0.1;

  // sweep
  std::vector<long long> batches;
  double tau = 0.1;
  long budget_epochs = 200;
  long steps_per_epoch = 1000;
  int seeds_per_batch = 5;
  std::string sampling = "with-replacement";
  std::string timing = "off";

  // bounds
  double b_dist = 0.0;
  double b_h_cap = 0.0;
  double b_p2 = 0.0;
  double b_h0_star = 0.0;
  std::optional<double> b_x_star;
  std::optional<double> b_c1;
  std::optional<double> b_c2;
  double eps = 0.1;
  double delta = 0.01;
  std::vector<long long> bounds_batches;  // optional explicit grid

  // validate
  long validate_steps = 400;
  int validate_dimension = 12;
  double validate_sigma2 = 2.0;
  int validate_batch = 8;
  long stats_samples = 2000;
  bool inject_fault = false;

  // fit
  std::string records_path;

  // common
  std::uint64_t seed = 1;
  int workers = 4;
  std::string out_dir;  // empty: environment/default
};

// Validates every field against the registry (types, ranges, required keys,
// unknown keys, rule compatibility); returns all errors, not just the first.
RunConfig resolve_config(const ParsedConfig& parsed, Subcommand cmd,
                         std::vector<ConfigError>& errors);

// Convenience: parse + resolve in one call.
RunConfig parse_config(const std::string& text, Subcommand cmd,
                       std::vector<ConfigError>& errors);

// Canonical `key = value` echo of a resolved configuration (config.resolved).
std::string render_resolved(const RunConfig& config);

Problem make_problem(const RunConfig& config);
PreconditionerRule make_rule(const RunConfig& config);

}  // namespace sfo
