#include "sfobench/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "sfobench/csv.hpp"

namespace sfo {

std::string to_string(Subcommand c) {
  switch (c) {
    case Subcommand::Sweep: return "sweep";
    case Subcommand::Bounds: return "bounds";
    case Subcommand::Fit: return "fit";
    case Subcommand::Validate: return "validate";
  }
  return "unknown";
}

namespace {

const char* const kKnownKeys[] = {
    "problem.kind", "problem.dimension", "problem.sigma2", "problem.theta0",
    "problem.samples", "problem.mlp_inputs", "problem.mlp_hidden",
    "problem.data_seed",
    "optimizer.rule", "optimizer.alpha", "optimizer.beta", "optimizer.gamma",
    "optimizer.eta", "optimizer.zeta", "optimizer.epsilon_num",
    "optimizer.bound_scale",
    "sweep.batches", "sweep.tau", "sweep.budget_epochs",
    "sweep.steps_per_epoch", "sweep.seeds", "sweep.sampling", "sweep.timing",
    "bounds.dist", "bounds.h_cap", "bounds.p2", "bounds.h0_star",
    "bounds.x_star", "bounds.c1", "bounds.c2", "bounds.eps", "bounds.delta",
    "bounds.batches",
    "validate.steps", "validate.dimension", "validate.sigma2",
    "validate.batch", "validate.stats_samples", "validate.inject_fault",
    "fit.records",
    "run.seed", "run.workers", "run.out_dir",
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

// Resolves a possibly-bare key to its canonical registry name.
std::optional<std::string> resolve_key(const std::string& key,
                                       std::vector<ConfigError>& errors) {
  for (const char* known : kKnownKeys)
    if (key == known) return key;
  // unique suffix match: `alpha` -> `optimizer.alpha`
  std::vector<std::string> hits;
  for (const char* known : kKnownKeys) {
    const std::string full = known;
    const std::size_t dot = full.rfind('.');
    if (full.substr(dot + 1) == key) hits.push_back(full);
  }
  if (hits.size() == 1) return hits[0];
  if (hits.empty()) {
    errors.push_back({key, "unknown key"});
  } else {
    std::string msg = "ambiguous key, candidates:";
    for (const std::string& h : hits) msg += " " + h;
    errors.push_back({key, msg});
  }
  return std::nullopt;
}

void assign(ParsedConfig& config, const std::string& fragment,
            const std::string& section, std::vector<ConfigError>& errors) {
  const std::size_t eq = fragment.find('=');
  if (eq == std::string::npos) {
    errors.push_back({"", "expected `key = value`, got: " + fragment});
    return;
  }
  std::string key = trim(fragment.substr(0, eq));
  const std::string value = trim(fragment.substr(eq + 1));
  if (key.empty()) {
    errors.push_back({"", "missing key before `=`"});
    return;
  }
  if (!section.empty() && key.find('.') == std::string::npos)
    key = section + "." + key;
  if (auto canonical = resolve_key(key, errors))
    config.values[*canonical] = value;
}

bool parse_double_strict(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_ll_strict(const std::string& s, long long& out) {
  if (s.empty()) return false;
  // power-of-two sugar: 2^k
  const std::size_t caret = s.find('^');
  if (caret != std::string::npos) {
    long long base = 0, exp = 0;
    if (!parse_ll_strict(s.substr(0, caret), base) ||
        !parse_ll_strict(s.substr(caret + 1), exp) || base != 2 || exp < 0 ||
        exp > 62)
      return false;
    out = 1LL << exp;
    return true;
  }
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

}  // namespace

ParsedConfig parse_key_values(const std::string& text,
                              std::vector<ConfigError>& errors) {
  ParsedConfig config;
  std::istringstream is(text);
  std::string line;
  std::string section;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    // Split at commas, re-joining fragments that carry no `=` (list values).
    std::vector<std::string> fragments;
    std::string cur;
    std::istringstream parts(line);
    std::string piece;
    while (std::getline(parts, piece, ',')) {
      if (piece.find('=') != std::string::npos && !cur.empty()) {
        fragments.push_back(cur);
        cur = piece;
      } else if (cur.empty()) {
        cur = piece;
      } else {
        cur += "," + piece;
      }
    }
    if (!trim(cur).empty()) fragments.push_back(cur);
    for (const std::string& frag : fragments)
      assign(config, frag, section, errors);
  }
  return config;
}

void apply_override(ParsedConfig& config, const std::string& assignment,
                    std::vector<ConfigError>& errors) {
  assign(config, assignment, "", errors);
}

namespace {

class Resolver {
 public:
  Resolver(const ParsedConfig& parsed, std::vector<ConfigError>& errors)
      : parsed_(parsed), errors_(errors) {}

  bool has(const std::string& key) const {
    return parsed_.values.count(key) > 0;
  }

  void require(const std::string& key) {
    if (!has(key)) errors_.push_back({key, "required key is missing"});
  }

  double number(const std::string& key, double fallback, double lo, double hi,
                bool lo_open, bool hi_open, const std::string& range_text) {
    auto it = parsed_.values.find(key);
    if (it == parsed_.values.end()) return fallback;
    double v = 0;
    if (!parse_double_strict(it->second, v)) {
      errors_.push_back({key, "not a number: " + it->second});
      return fallback;
    }
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    if (!lo_ok || !hi_ok) {
      errors_.push_back({key, "value " + it->second + " outside " +
                                  range_text});
      return fallback;
    }
    return v;
  }

  long long integer(const std::string& key, long long fallback, long long lo,
                    long long hi) {
    auto it = parsed_.values.find(key);
    if (it == parsed_.values.end()) return fallback;
    long long v = 0;
    if (!parse_ll_strict(it->second, v)) {
      errors_.push_back({key, "not an integer: " + it->second});
      return fallback;
    }
    if (v < lo || v > hi) {
      errors_.push_back({key, "value " + it->second + " outside [" +
                                  std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]"});
      return fallback;
    }
    return v;
  }

  std::optional<double> optional_number(const std::string& key, double lo,
                                        double hi, bool lo_open, bool hi_open,
                                        const std::string& range_text) {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0, lo, hi, lo_open, hi_open, range_text);
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) {
    auto it = parsed_.values.find(key);
    if (it == parsed_.values.end()) return fallback;
    if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end()) {
      std::string msg = "must be one of:";
      for (const std::string& a : allowed) msg += " " + a;
      errors_.push_back({key, msg + " (got " + it->second + ")"});
      return fallback;
    }
    return it->second;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    auto it = parsed_.values.find(key);
    return it == parsed_.values.end() ? fallback : it->second;
  }

  bool flag(const std::string& key, bool fallback) {
    auto it = parsed_.values.find(key);
    if (it == parsed_.values.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    errors_.push_back({key, "expected true/false"});
    return fallback;
  }

  std::vector<long long> batch_list(const std::string& key) {
    std::vector<long long> out;
    auto it = parsed_.values.find(key);
    if (it == parsed_.values.end()) return out;
    std::istringstream parts(it->second);
    std::string piece;
    while (std::getline(parts, piece, ',')) {
      piece = trim(piece);
      if (piece.empty()) continue;
      long long v = 0;
      if (!parse_ll_strict(piece, v) || v < 1) {
        errors_.push_back({key, "bad batch size: " + piece});
        return {};
      }
      out.push_back(v);
    }
    if (out.empty()) {
      errors_.push_back({key, "empty batch list"});
      return out;
    }
    if (!std::is_sorted(out.begin(), out.end()))
      errors_.push_back({key, "batch list must be sorted ascending"});
    return out;
  }

 private:
  const ParsedConfig& parsed_;
  std::vector<ConfigError>& errors_;
};

}  // namespace

RunConfig resolve_config(const ParsedConfig& parsed, Subcommand cmd,
                         std::vector<ConfigError>& errors) {
  Resolver r(parsed, errors);
  RunConfig cfg;
  cfg.cmd = cmd;

  // required keys per subcommand
  if (cmd == Subcommand::Sweep) {
    r.require("problem.kind");
    r.require("optimizer.rule");
    r.require("optimizer.alpha");
    r.require("sweep.batches");
    r.require("sweep.tau");
    if (r.text("problem.kind", "") != "finite-sum-mlp")
      r.require("problem.dimension");
  } else if (cmd == Subcommand::Bounds) {
    r.require("problem.dimension");
    r.require("problem.sigma2");
    r.require("optimizer.alpha");
    r.require("bounds.dist");
    r.require("bounds.h_cap");
    r.require("bounds.p2");
    r.require("bounds.h0_star");
  } else if (cmd == Subcommand::Fit) {
    r.require("fit.records");
  }

  cfg.problem_kind = r.choice(
      "problem.kind", "noisy-quadratic",
      {"noisy-quadratic", "noisy-rosenbrock", "finite-sum-mlp"});
  cfg.dimension = static_cast<int>(r.integer("problem.dimension", 2, 1, 500));
  cfg.sigma2 = r.number("problem.sigma2", 0.0, 0.0, 1e300, false, false,
                        "[0, inf)");
  cfg.theta0_fill = r.number("problem.theta0", 1.0, -1e300, 1e300, false,
                             false, "(-inf, inf)");
  cfg.mlp_samples =
      static_cast<int>(r.integer("problem.samples", 128, 1, 1000000));
  cfg.mlp_inputs = static_cast<int>(r.integer("problem.mlp_inputs", 4, 1, 64));
  cfg.mlp_hidden = static_cast<int>(r.integer("problem.mlp_hidden", 8, 1, 64));
  cfg.data_seed = static_cast<std::uint64_t>(
      r.integer("problem.data_seed", 7, 0, (1LL << 62)));
  if (cfg.problem_kind == "finite-sum-mlp") {
    if (r.has("problem.sigma2"))
      errors.push_back({"problem.sigma2",
                        "derived from the data for finite-sum-mlp"});
    if (r.has("problem.dimension"))
      errors.push_back({"problem.dimension",
                        "derived from the layer sizes for finite-sum-mlp"});
  }

  cfg.rule_name = r.choice(
      "optimizer.rule", "sgd",
      {"sgd", "momentum", "amsgrad", "amsbound", "adam", "adabelief"});
  cfg.hyper.alpha =
      r.number("optimizer.alpha", 1e-3, 0.0, 1e300, true, false, "(0, inf)");
  cfg.hyper.beta =
      r.number("optimizer.beta", 0.0, 0.0, 1.0, false, true, "[0,1)");
  cfg.hyper.gamma =
      r.number("optimizer.gamma", 0.0, 0.0, 1.0, false, true, "[0,1)");
  cfg.hyper.eta =
      r.number("optimizer.eta", 0.999, 0.0, 1.0, false, true, "[0,1)");
  cfg.hyper.zeta =
      r.number("optimizer.zeta", 0.999, 0.0, 1.0, false, true, "[0,1)");
  cfg.hyper.epsilon_num = r.number("optimizer.epsilon_num", 1e-8, 0.0, 1e300,
                                   true, false, "(0, inf)");
  cfg.bound_scale = r.number("optimizer.bound_scale", 0.1, 0.0, 1e300, true,
                             false, "(0, inf)");

  cfg.batches = r.batch_list("sweep.batches");
  cfg.tau = r.number("sweep.tau", 0.1, 0.0, 1e300, false, false, "[0, inf)");
  cfg.budget_epochs =
      static_cast<long>(r.integer("sweep.budget_epochs", 200, 1, 1000000000));
  cfg.steps_per_epoch = static_cast<long>(
      r.integer("sweep.steps_per_epoch", 1000, 1, 1000000000));
  cfg.seeds_per_batch =
      static_cast<int>(r.integer("sweep.seeds", 5, 1, 10000));
  cfg.sampling = r.choice("sweep.sampling", "with-replacement",
                          {"with-replacement", "without-replacement"});
  cfg.timing = r.choice("sweep.timing", "off", {"off", "wall"});

  cfg.b_dist = r.number("bounds.dist", 0.0, 0.0, 1e300, false, false,
                        "[0, inf)");
  cfg.b_h_cap =
      r.number("bounds.h_cap", 0.0, 0.0, 1e300, false, false, "[0, inf)");
  cfg.b_p2 = r.number("bounds.p2", 0.0, 0.0, 1e300, false, false, "[0, inf)");
  cfg.b_h0_star = r.number("bounds.h0_star", 0.0, 0.0, 1e300, true, false,
                           "(0, inf)");
  cfg.b_x_star =
      r.optional_number("bounds.x_star", -1e300, 1e300, false, false,
                        "(-inf, inf)");
  cfg.b_c1 = r.optional_number("bounds.c1", 0.0, 1.0, false, false, "[0,1]");
  cfg.b_c2 =
      r.optional_number("bounds.c2", 0.0, 1e300, false, false, "[0, inf)");
  cfg.eps = r.number("bounds.eps", 0.1, 0.0, 1e300, true, false, "(0, inf)");
  cfg.delta = r.number("bounds.delta", 0.01, 0.0, 1.0, true, false, "(0,1]");
  cfg.bounds_batches = r.batch_list("bounds.batches");

  cfg.validate_steps =
      static_cast<long>(r.integer("validate.steps", 400, 0, 100000000));
  cfg.validate_dimension =
      static_cast<int>(r.integer("validate.dimension", 12, 1, 500));
  cfg.validate_sigma2 = r.number("validate.sigma2", 2.0, 0.0, 1e300, false,
                                 false, "[0, inf)");
  cfg.validate_batch =
      static_cast<int>(r.integer("validate.batch", 8, 1, 1000000));
  cfg.stats_samples = static_cast<long>(
      r.integer("validate.stats_samples", 2000, 1, 100000000));
  cfg.inject_fault = r.flag("validate.inject_fault", false);

  cfg.records_path = r.text("fit.records", "");

  cfg.seed =
      static_cast<std::uint64_t>(r.integer("run.seed", 1, 0, (1LL << 62)));
  cfg.workers = static_cast<int>(r.integer("run.workers", 4, 1, 1024));
  cfg.out_dir = r.text("run.out_dir", "");

  // rule/hyper compatibility, reported with full context
  PreconditionerRule rule = make_rule(cfg);
  for (const std::string& e : validate_hyper(rule, cfg.hyper))
    errors.push_back({"optimizer", e});

  return cfg;
}

RunConfig parse_config(const std::string& text, Subcommand cmd,
                       std::vector<ConfigError>& errors) {
  ParsedConfig parsed = parse_key_values(text, errors);
  return resolve_config(parsed, cmd, errors);
}

namespace {

std::string join_batches(const std::vector<long long>& batches) {
  std::string out;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(batches[i]);
  }
  return out;
}

}  // namespace

std::string render_resolved(const RunConfig& c) {
  std::ostringstream os;
  os << "subcommand = " << to_string(c.cmd) << '\n';
  os << "problem.kind = " << c.problem_kind << '\n';
  if (c.problem_kind == "finite-sum-mlp") {
    os << "problem.samples = " << c.mlp_samples << '\n';
    os << "problem.mlp_inputs = " << c.mlp_inputs << '\n';
    os << "problem.mlp_hidden = " << c.mlp_hidden << '\n';
    os << "problem.data_seed = " << c.data_seed << '\n';
  } else {
    os << "problem.dimension = " << c.dimension << '\n';
    os << "problem.sigma2 = " << format_g17(c.sigma2) << '\n';
    os << "problem.theta0 = " << format_g17(c.theta0_fill) << '\n';
  }
  os << "optimizer.rule = " << c.rule_name << '\n';
  os << "optimizer.alpha = " << format_g17(c.hyper.alpha) << '\n';
  os << "optimizer.beta = " << format_g17(c.hyper.beta) << '\n';
  os << "optimizer.gamma = " << format_g17(c.hyper.gamma) << '\n';
  os << "optimizer.eta = " << format_g17(c.hyper.eta) << '\n';
  os << "optimizer.zeta = " << format_g17(c.hyper.zeta) << '\n';
  os << "optimizer.epsilon_num = " << format_g17(c.hyper.epsilon_num) << '\n';
  if (c.rule_name == "amsbound")
    os << "optimizer.bound_scale = " << format_g17(c.bound_scale) << '\n';
  if (c.cmd == Subcommand::Sweep) {
    os << "sweep.batches = " << join_batches(c.batches) << '\n';
    os << "sweep.tau = " << format_g17(c.tau) << '\n';
    os << "sweep.budget_epochs = " << c.budget_epochs << '\n';
    os << "sweep.steps_per_epoch = " << c.steps_per_epoch << '\n';
    os << "sweep.seeds = " << c.seeds_per_batch << '\n';
    os << "sweep.sampling = " << c.sampling << '\n';
    os << "sweep.timing = " << c.timing << '\n';
  }
  if (c.cmd == Subcommand::Bounds) {
    os << "bounds.dist = " << format_g17(c.b_dist) << '\n';
    os << "bounds.h_cap = " << format_g17(c.b_h_cap) << '\n';
    os << "bounds.p2 = " << format_g17(c.b_p2) << '\n';
    os << "bounds.h0_star = " << format_g17(c.b_h0_star) << '\n';
    if (c.b_x_star) os << "bounds.x_star = " << format_g17(*c.b_x_star) << '\n';
    if (c.b_c1) os << "bounds.c1 = " << format_g17(*c.b_c1) << '\n';
    if (c.b_c2) os << "bounds.c2 = " << format_g17(*c.b_c2) << '\n';
    os << "bounds.eps = " << format_g17(c.eps) << '\n';
    os << "bounds.delta = " << format_g17(c.delta) << '\n';
    if (!c.bounds_batches.empty())
      os << "bounds.batches = " << join_batches(c.bounds_batches) << '\n';
  }
  if (c.cmd == Subcommand::Validate) {
    os << "validate.steps = " << c.validate_steps << '\n';
    os << "validate.dimension = " << c.validate_dimension << '\n';
    os << "validate.sigma2 = " << format_g17(c.validate_sigma2) << '\n';
    os << "validate.batch = " << c.validate_batch << '\n';
    os << "validate.stats_samples = " << c.stats_samples << '\n';
    os << "validate.inject_fault = " << (c.inject_fault ? "true" : "false")
       << '\n';
  }
  if (c.cmd == Subcommand::Fit)
    os << "fit.records = " << c.records_path << '\n';
  os << "run.seed = " << c.seed << '\n';
  os << "run.workers = " << c.workers << '\n';
  if (!c.out_dir.empty()) os << "run.out_dir = " << c.out_dir << '\n';
  return os.str();
}

Problem make_problem(const RunConfig& config) {
  if (config.problem_kind == "noisy-quadratic")
    return Problem::noisy_quadratic(config.dimension, config.sigma2);
  if (config.problem_kind == "noisy-rosenbrock")
    return Problem::noisy_rosenbrock(config.dimension, config.sigma2);
  MlpSpec spec;
  spec.input_dim = config.mlp_inputs;
  spec.hidden_dim = config.mlp_hidden;
  spec.sample_count = config.mlp_samples;
  spec.data_seed = config.data_seed;
  return Problem::finite_sum_mlp(spec);
}

PreconditionerRule make_rule(const RunConfig& config) {
  PreconditionerRule rule;
  rule.variant = rule_from_string(config.rule_name).value_or(RuleVariant::Sgd);
  rule.bound_scale = config.bound_scale;
  return rule;
}

}  // namespace sfo
