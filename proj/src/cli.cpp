#include "sfobench/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sfobench/bounds.hpp"
#include "sfobench/csv.hpp"
#include "sfobench/diagnostics.hpp"
#include "sfobench/svg.hpp"
#include "sfobench/sweep.hpp"

namespace sfo::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace

fs::path prepare_run_dir(const RunConfig& config, const std::string& pinned) {
  if (!pinned.empty()) {
    fs::path dir(pinned);
    fs::create_directories(dir);
    return dir;
  }
  std::string root = config.out_dir;
  if (root.empty()) {
    if (const char* env = std::getenv("SFOBENCH_OUT_DIR")) root = env;
  }
  if (root.empty()) root = "runs";
  fs::path base = fs::path(root) /
                  (timestamp_utc() + "-" + to_string(config.cmd));
  fs::path dir = base;
  for (int n = 2; fs::exists(dir); ++n)
    dir = base.concat("-" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

namespace {

HyperParams hyper_for_rule(RuleVariant variant, const HyperParams& base) {
  HyperParams h = base;
  switch (variant) {
    case RuleVariant::Sgd:
      h.beta = 0.0;
      h.gamma = 0.0;
      break;
    case RuleVariant::Momentum:
    case RuleVariant::AmsGrad:
    case RuleVariant::AmsBound:
      h.gamma = 0.0;
      break;
    default:
      break;
  }
  return h;
}

// ---------------------------------------------------------------- sweep ---

struct SweepArtifacts {
  std::vector<SweepRecord> records;
  std::vector<BatchSummary> summaries;
};

void write_sweep_plots(const RunConfig& cfg, const SweepArtifacts& art,
                       const fs::path& dir) {
  // steps vs batch, with a dashed perfect-scaling reference through the
  // first usable point and capped markers for timeouts
  LogLogChart steps_chart;
  steps_chart.title = "Steps to threshold vs batch size";
  steps_chart.x_label = "batch size b";
  steps_chart.y_label = "steps K";
  Series measured;
  measured.label = "median K (" + cfg.rule_name + ")";
  measured.color = "#1f77b4";
  Series reference;
  reference.label = "perfect scaling (K ~ 1/b)";
  reference.color = "#888888";
  reference.dashed = true;
  reference.marker = Marker::None;
  Series timeouts;
  timeouts.label = "timeout (capped)";
  timeouts.color = "#d62728";
  timeouts.marker = Marker::Cross;
  timeouts.draw_line = false;

  std::optional<std::pair<double, double>> anchor;
  for (const BatchSummary& s : art.summaries) {
    if (s.k_median) {
      measured.points.emplace_back(double(s.batch), *s.k_median);
      if (!anchor) anchor = {double(s.batch), *s.k_median};
    }
    if (s.n_ok < s.n_total) {
      const double cap = double(cfg.budget_epochs) *
                         double(cfg.steps_per_epoch);
      timeouts.points.emplace_back(double(s.batch), cap);
    }
  }
  if (anchor)
    for (const BatchSummary& s : art.summaries)
      reference.points.emplace_back(
          double(s.batch), anchor->second * anchor->first / double(s.batch));
  steps_chart.series = {measured, reference};
  if (!timeouts.points.empty()) steps_chart.series.push_back(timeouts);
  write_file(dir / "steps_vs_batch.svg", steps_chart.render());

  LogLogChart sfo_chart;
  sfo_chart.title = "SFO complexity vs batch size";
  sfo_chart.x_label = "batch size b";
  sfo_chart.y_label = "SFO complexity Kb";
  Series sfo_series;
  sfo_series.label = "median Kb (" + cfg.rule_name + ")";
  sfo_series.color = "#2ca02c";
  for (const BatchSummary& s : art.summaries)
    if (s.sfo_median)
      sfo_series.points.emplace_back(double(s.batch), *s.sfo_median);
  sfo_chart.series = {sfo_series};
  try {
    const CriticalBatchEstimate cb = estimate_critical_batch(art.records);
    VerticalMark mark;
    mark.x = double(cb.batch);
    mark.label = "critical b = " + std::to_string(cb.batch) +
                 ", min Kb = " + format_g6(cb.min_sfo);
    sfo_chart.vmarks.push_back(mark);
  } catch (const NoDataError&) {
  }
  write_file(dir / "sfo_vs_batch.svg", sfo_chart.render());
}

}  // namespace

int run_sweep(const RunConfig& cfg, const fs::path& dir) {
  write_file(dir / "config.resolved", render_resolved(cfg));
  const Problem problem = make_problem(cfg);
  const PreconditionerRule rule = make_rule(cfg);

  SweepConfig sc;
  sc.batches = cfg.batches;
  sc.tau = cfg.tau;
  sc.budget_epochs = cfg.budget_epochs;
  sc.steps_per_epoch = cfg.steps_per_epoch;
  sc.seeds_per_batch = cfg.seeds_per_batch;
  sc.master_seed = cfg.seed;
  sc.workers = cfg.workers;
  sc.sampling = cfg.sampling == "without-replacement"
                    ? SamplingMode::WithoutReplacement
                    : SamplingMode::WithReplacement;
  if (cfg.problem_kind != "finite-sum-mlp")
    sc.theta0 = ParamVector(problem.dimension(), cfg.theta0_fill);

  SweepArtifacts art;
  art.records = sfo_sweep(problem, rule, cfg.hyper, sc);
  art.summaries = summarize(art.records);

  {
    std::ostringstream os;
    write_records_csv(art.records, os, cfg.timing == "wall");
    write_file(dir / "records.csv", os.str());
  }
  {
    std::ostringstream os;
    write_summary_csv(art.summaries, os);
    write_file(dir / "summary.csv", os.str());
  }
  write_sweep_plots(cfg, art, dir);

  std::ostringstream rep;
  rep << "sweep report\n";
  rep << "problem = " << cfg.problem_kind << ", rule = " << cfg.rule_name
      << ", tau = " << format_g17(cfg.tau) << ", seeds = "
      << cfg.seeds_per_batch << "\n\n";
  double total_wall = 0.0;
  for (const SweepRecord& r : art.records) total_wall += r.wall_time_s;
  rep << "runs = " << art.records.size()
      << ", total wall time s = " << format_g6(total_wall) << "\n";

  try {
    const CriticalBatchEstimate cb = estimate_critical_batch(art.records);
    rep << "critical_batch_measured = " << cb.batch << "\n";
    rep << "min_median_sfo = " << format_g17(cb.min_sfo) << "\n";
  } catch (const NoDataError& e) {
    rep << "critical_batch_measured = absent (" << e.what() << ")\n";
  }
  try {
    const long long scaling_end = detect_perfect_scaling(art.records, 0.1);
    rep << "perfect_scaling_end = " << scaling_end << "\n";
  } catch (const std::exception& e) {
    rep << "perfect_scaling_end = absent (" << e.what() << ")\n";
  }
  std::optional<RationalFit> fit;
  try {
    fit = fit_rational(art.records);
    rep << "fit.a_hat = " << format_g17(fit->a_hat) << "\n";
    rep << "fit.b_hat = " << format_g17(fit->b_hat) << "\n";
    rep << "fit.c_hat = " << format_g17(fit->c_hat) << "\n";
    rep << "fit.asymptote = " << format_g17(fit->asymptote) << "\n";
    rep << "fit.critical_batch = " << format_g17(fit->critical_batch) << "\n";
    rep << "fit.residual_norm = " << format_g17(fit->residual_norm) << "\n";
  } catch (const FitError& e) {
    rep << "fit = failed (" << e.what() << ")\n";
  }

  // Consistency triangle: measured argmin, fitted critical batch, and the
  // theoretical b_* from empirical constants measured on a short run at the
  // smallest batch. Reported, not asserted; constants are empirical.
  try {
    RunOptions opts;
    opts.batch = static_cast<int>(cfg.batches.front());
    opts.stop = StopCondition::steps(
        std::min<long>(1000, cfg.budget_epochs * cfg.steps_per_epoch));
    opts.seed = mix64(cfg.seed ^ 0xd1a60057ULL);
    opts.record = RecordMode::Full;
    opts.theta0 = sc.theta0;
    Trajectory traj = run(problem, cfg.hyper, rule, opts);
    if (!traj.steps.empty()) {
      OracleStats stats = estimate_oracle_stats(problem, traj, 2000);
      if (stats.dist_hat) {
        bounds::LowerBoundInputs in;
        in.alpha = cfg.hyper.alpha;
        in.beta = cfg.hyper.beta;
        in.gamma = cfg.hyper.gamma;
        in.dimension = problem.dimension();
        in.dist = *stats.dist_hat;
        in.h_cap = stats.h_cap;
        in.sigma2 = problem.noise_variance() > 0 ? problem.noise_variance()
                                                 : stats.sigma2_hat;
        in.p2 = stats.p2_hat;
        in.h0_star = stats.h0_star;
        bounds::BoundConstants k = bounds::make_constants(
            bounds::lower_constants(in), bounds::UpperConstants{}, cfg.eps,
            cfg.delta);
        rep << "empirical-constant lower bound (observed maxima, not proven "
               "bounds):\n";
        if (k.lower_valid()) {
          bounds::CriticalBatch cb = bounds::critical_batch_lower(k);
          rep << "bound.b_star_lower = " << format_g17(cb.batch) << "\n";
          rep << "bound.min_sfo_lower = " << format_g17(cb.min_sfo) << "\n";
          try {
            const CriticalBatchEstimate measured =
                estimate_critical_batch(art.records);
            const double hi = std::max(
                {double(measured.batch),
                 fit ? fit->critical_batch : double(measured.batch),
                 cb.batch});
            const double lo = std::min(
                {double(measured.batch),
                 fit ? fit->critical_batch : double(measured.batch),
                 cb.batch});
            rep << "triangle.spread_factor = " << format_g6(hi / lo)
                << (hi / lo <= 4.0 ? " (within factor-4 band)\n"
                                   : " (outside factor-4 band)\n");
          } catch (const NoDataError&) {
          }
        } else {
          rep << "bound.b_star_lower = absent (eps^2 <= C + D)\n";
        }
      }
    }
  } catch (const std::exception& e) {
    rep << "triangle = absent (" << e.what() << ")\n";
  }

  rep << "\nb,K_median,sfo_median,n_ok\n";
  for (const BatchSummary& s : art.summaries) {
    rep << s.batch << ",";
    rep << (s.k_median ? format_g17(*s.k_median) : std::string()) << ",";
    rep << (s.sfo_median ? format_g17(*s.sfo_median) : std::string()) << ",";
    rep << s.n_ok << "\n";
  }
  write_file(dir / "report.txt", rep.str());
  std::cout << "sweep written to " << dir.string() << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- bounds ---

int run_bounds(const RunConfig& cfg, const fs::path& dir) {
  write_file(dir / "config.resolved", render_resolved(cfg));

  bounds::LowerBoundInputs lin;
  lin.alpha = cfg.hyper.alpha;
  lin.beta = cfg.hyper.beta;
  lin.gamma = cfg.hyper.gamma;
  lin.dimension = cfg.dimension;
  lin.dist = cfg.b_dist;
  lin.h_cap = cfg.b_h_cap;
  lin.sigma2 = cfg.sigma2;
  lin.p2 = cfg.b_p2;
  lin.h0_star = cfg.b_h0_star;
  const bounds::LowerConstants lo = bounds::lower_constants(lin);

  bounds::UpperConstants up;
  const bool have_upper = cfg.b_x_star.has_value();
  if (have_upper) {
    bounds::UpperBoundInputs uin;
    uin.alpha = cfg.hyper.alpha;
    uin.beta = cfg.hyper.beta;
    uin.gamma = cfg.hyper.gamma;
    uin.x_star = *cfg.b_x_star;
    uin.sigma2 = cfg.sigma2;
    uin.p2 = cfg.b_p2;
    uin.c1 = cfg.b_c1.value_or(1.0);
    uin.c2 = cfg.b_c2.value_or(0.0);
    up = bounds::upper_constants(uin);
  } else {
    up.vacuous = true;
  }
  const bounds::BoundConstants k =
      bounds::make_constants(lo, up, cfg.eps, cfg.delta);

  std::ostringstream rep;
  rep << "bound curves (empirical-constant inputs)\n";
  rep << "A = " << format_g17(k.a) << "\n";
  rep << "B = " << format_g17(k.b) << "\n";
  rep << "C = " << format_g17(k.c) << "\n";
  rep << "D = " << format_g17(k.d) << "\n";
  if (have_upper) {
    rep << "E = " << format_g17(k.e) << "\n";
    rep << "F = " << format_g17(k.f) << "\n";
    rep << "G = " << format_g17(k.g) << "\n";
  }
  rep << "eps = " << format_g17(k.eps) << ", delta = " << format_g17(k.delta)
      << "\n";

  const bool lower_valid = k.lower_valid();
  std::optional<bounds::CriticalBatch> cbl, cbu;
  if (!lower_valid) {
    rep << "lower curve: not informative (eps^2 <= C + D)\n";
  } else {
    rep << "lower.domain_threshold = "
        << format_g17(k.lower_domain_threshold()) << "\n";
    rep << "lower.asymptote = " << format_g17(k.lower_asymptote()) << "\n";
    cbl = bounds::critical_batch_lower(k);
    if (cbl->degenerate) {
      rep << "lower.critical_batch = absent (B = 0: K(b) b is monotone "
             "increasing, no interior minimizer)\n";
    } else {
      rep << "lower.critical_batch = " << format_g17(cbl->batch) << "\n";
      rep << "lower.min_sfo = " << format_g17(cbl->min_sfo) << "\n";
    }
  }
  if (!k.upper_vacuous()) {
    rep << "upper.domain_threshold = " << format_g17(k.upper_domain_threshold())
        << "\n";
    rep << "upper.asymptote = " << format_g17(k.upper_asymptote()) << "\n";
    cbu = bounds::critical_batch_upper(k);
    rep << "upper.critical_batch = " << format_g17(cbu->batch) << "\n";
    rep << "upper.min_sfo = " << format_g17(cbu->min_sfo) << "\n";
    if (cbl && !cbl->degenerate && cbu->batch > 0) {
      rep << "critical_batch_relative_gap = "
          << format_g17(std::abs(cbl->batch - cbu->batch) / cbl->batch) << "\n";
    }
    if (lower_valid) {
      const bounds::FitResiduals r = bounds::fit_condition_residuals(k);
      rep << "fit_residual_r1 = " << format_g17(r.r1) << "\n";
      rep << "fit_residual_r2 = " << format_g17(r.r2) << "\n";
    }
  } else if (have_upper) {
    rep << "upper curve: bound-not-informative (F <= 0)\n";
  }
  if (!lower_valid && k.upper_vacuous()) {
    write_file(dir / "report.txt", rep.str());
    std::cout << "bounds written to " << dir.string() << "\n";
    return kExitOk;
  }

  // grid: explicit powers of two, or geometric auto-grid over the domain
  std::vector<double> grid;
  if (!cfg.bounds_batches.empty()) {
    for (long long b : cfg.bounds_batches) grid.push_back(double(b));
  } else {
    const double thr = lower_valid ? k.lower_domain_threshold()
                                   : k.upper_domain_threshold();
    const double lo_b = std::max(thr, 1e-12) * 1.05;
    double hi_b = lo_b * 1e3;
    if (cbl && !cbl->degenerate) hi_b = std::max(hi_b, cbl->batch * 32);
    if (cbu && cbu->batch > 0) hi_b = std::max(hi_b, cbu->batch * 32);
    const int points = 64;
    for (int i = 0; i < points; ++i)
      grid.push_back(lo_b * std::pow(hi_b / lo_b, double(i) / (points - 1)));
  }
  const std::vector<bounds::CurvePoint> table = bounds::curve_table(k, grid);
  {
    std::ostringstream os;
    bounds::write_curve_csv(table, os);
    write_file(dir / "bounds_curves.csv", os.str());
  }

  LogLogChart kchart;
  kchart.title = "Bound curves: steps vs batch size";
  kchart.x_label = "batch size b";
  kchart.y_label = "steps K";
  Series klow{"lower bound", {}, "#1f77b4", false, Marker::None};
  Series kup{"upper bound", {}, "#d62728", false, Marker::None};
  LogLogChart schart;
  schart.title = "Bound curves: SFO complexity vs batch size";
  schart.x_label = "batch size b";
  schart.y_label = "SFO complexity Kb";
  Series slow{"lower bound SFO", {}, "#1f77b4", false, Marker::None};
  Series sup{"upper bound SFO", {}, "#d62728", false, Marker::None};
  for (const bounds::CurvePoint& p : table) {
    if (p.k_lower) klow.points.emplace_back(p.batch, *p.k_lower);
    if (p.k_upper) kup.points.emplace_back(p.batch, *p.k_upper);
    if (p.sfo_lower) slow.points.emplace_back(p.batch, *p.sfo_lower);
    if (p.sfo_upper) sup.points.emplace_back(p.batch, *p.sfo_upper);
  }
  if (!klow.points.empty()) kchart.series.push_back(klow);
  if (!slow.points.empty()) schart.series.push_back(slow);
  if (!kup.points.empty()) kchart.series.push_back(kup);
  if (!sup.points.empty()) schart.series.push_back(sup);
  if (cbl && !cbl->degenerate)
    schart.vmarks.push_back(
        {cbl->batch, "b_* = " + format_g6(cbl->batch), "#1f77b4"});
  if (cbu && cbu->informative && cbu->batch > 0)
    schart.vmarks.push_back(
        {cbu->batch, "b^* = " + format_g6(cbu->batch), "#d62728"});
  write_file(dir / "bound_steps.svg", kchart.render());
  write_file(dir / "bound_sfo.svg", schart.render());

  write_file(dir / "report.txt", rep.str());
  std::cout << "bounds written to " << dir.string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ fit ---

int run_fit(const RunConfig& cfg, const fs::path& dir) {
  write_file(dir / "config.resolved", render_resolved(cfg));
  std::ifstream is(cfg.records_path);
  if (!is)
    throw std::runtime_error("cannot read records: " + cfg.records_path);
  const CsvTable table = read_csv(is);
  const int col_b = table.column_index("b");
  const int col_k = table.column_index("K");
  const int col_status = table.column_index("status");
  if (col_b < 0 || col_k < 0 || col_status < 0)
    throw std::runtime_error("records csv lacks b/K/status columns");

  std::vector<SweepRecord> records;
  for (const auto& row : table.rows) {
    SweepRecord r;
    r.batch = std::strtoll(row[col_b].c_str(), nullptr, 10);
    const std::string& status = row[col_status];
    if (status == "ok" && !row[col_k].empty()) {
      r.status = RunStatus::Ok;
      r.steps = std::strtol(row[col_k].c_str(), nullptr, 10);
      r.sfo = *r.steps * r.batch;
    } else {
      r.status = status == "diverged" ? RunStatus::Diverged
                                      : RunStatus::Timeout;
    }
    records.push_back(r);
  }

  std::ostringstream rep;
  rep << "rational fit of K(b) ~ a b / (c b - b0)\n";
  rep << "records = " << records.size() << " from " << cfg.records_path
      << "\n";
  const RationalFit fit = fit_rational(records);
  rep << "a_hat = " << format_g17(fit.a_hat) << "\n";
  rep << "b_hat = " << format_g17(fit.b_hat) << "\n";
  rep << "c_hat = " << format_g17(fit.c_hat) << "\n";
  rep << "asymptote = " << format_g17(fit.asymptote) << "\n";
  rep << "implied_critical_batch = " << format_g17(fit.critical_batch) << "\n";
  rep << "residual_norm = " << format_g17(fit.residual_norm) << "\n";
  try {
    const CriticalBatchEstimate cb = estimate_critical_batch(records);
    rep << "measured_critical_batch = " << cb.batch << "\n";
    rep << "measured_min_sfo = " << format_g17(cb.min_sfo) << "\n";
  } catch (const NoDataError&) {
  }
  write_file(dir / "report.txt", rep.str());
  std::cout << "fit written to " << dir.string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- validate ---

int run_validate(const RunConfig& cfg, const fs::path& dir) {
  write_file(dir / "config.resolved", render_resolved(cfg));
  std::ostringstream rep;
  rep << "validate report\n";
  if (cfg.validate_steps == 0) {
    rep << "steps = 0: nothing to run\n";
    write_file(dir / "report.txt", rep.str());
    std::cout << rep.str();
    return kExitOk;
  }

  const Problem problem =
      Problem::noisy_quadratic(cfg.validate_dimension, cfg.validate_sigma2);
  bool ok = true;
  long failing_step = -1;
  std::string failing_what;

  const RuleVariant variants[] = {RuleVariant::Sgd,      RuleVariant::Momentum,
                                  RuleVariant::AmsGrad,  RuleVariant::AmsBound,
                                  RuleVariant::Adam,     RuleVariant::AdaBelief};
  for (RuleVariant variant : variants) {
    PreconditionerRule rule;
    rule.variant = variant;
    rule.bound_scale = cfg.bound_scale;
    HyperParams base = cfg.hyper;
    base.beta = 0.9;
    base.gamma = 0.9;
    const HyperParams hyper = hyper_for_rule(variant, base);

    RunOptions opts;
    opts.batch = cfg.validate_batch;
    opts.stop = StopCondition::steps(cfg.validate_steps);
    opts.seed = cfg.seed;
    opts.record = RecordMode::Full;
    opts.theta0 = ParamVector(problem.dimension(), cfg.theta0_fill);
    Trajectory traj = run(problem, hyper, rule, opts);
    if (cfg.inject_fault && !traj.steps.empty())
      traj.steps[traj.steps.size() / 2].d[0] += 0.5;  // test hook

    const std::string name = to_string(variant);
    rep << "\n[" << name << "]\n";
    if (traj.fault) {
      rep << "diverged_at_step = " << traj.fault->step << "\n";
      ok = false;
      failing_step = traj.fault->step;
      failing_what = name + " diverged";
      continue;
    }

    const ParamVector theta_ref = *problem.reference_point();
    const IdentityReport identity =
        pathwise_identity_residuals(traj, theta_ref);
    rep << "identity.max_scaled_residual = " << format_g17(identity.max_scaled)
        << " at step " << identity.argmax_step << "\n";
    if (!(identity.max_scaled < 1e-9)) {
      ok = false;
      failing_step = identity.argmax_step;
      failing_what = name + " identity residual";
    }

    OracleStats stats = estimate_oracle_stats(problem, traj, cfg.stats_samples);
    const MomentumBoundReport mb =
        momentum_bound_check(traj, stats, cfg.validate_batch);
    rep << "momentum.mean_m2 = " << format_g17(mb.mean_m2)
        << " bound = " << format_g17(mb.m_bound) << "\n";
    rep << "momentum.mean_d2h = " << format_g17(mb.mean_d2h)
        << " bound = " << format_g17(mb.d_bound) << "\n";
    rep << "momentum.pathwise_violations = " << mb.pathwise_violations << "\n";
    if (!mb.pathwise_ok()) {
      ok = false;
      failing_step = -1;
      failing_what = name + " pathwise search-direction bound";
    }

    // Sample-path check of the closed-form step-count envelopes: the decomposition
    // estimate of V(K) against the closed-form envelope built from the
    // measured constants. Expectation statements, so reported, not asserted.
    if (traj.steps.size() >= 3 && stats.dist_hat) {
      const long horizon = static_cast<long>(traj.steps.size()) - 1;
      const DecompositionReport dec =
          decompose_v(problem, traj, *problem.reference_point(), horizon);
      bounds::LowerBoundInputs lin;
      lin.alpha = hyper.alpha;
      lin.beta = hyper.beta;
      lin.gamma = hyper.gamma;
      lin.dimension = problem.dimension();
      lin.dist = *stats.dist_hat;
      lin.h_cap = stats.h_cap;
      lin.sigma2 = problem.noise_variance();
      lin.p2 = stats.p2_hat;
      lin.h0_star = stats.h0_star;
      const bounds::LowerConstants lc = bounds::lower_constants(lin);
      const double envelope = lc.a / horizon +
                              lc.b / cfg.validate_batch + lc.c + lc.d;
      rep << "envelope.v_hat = " << format_g17(dec.v_hat) << " (K = " << horizon
          << ")\n";
      rep << "envelope.upper = " << format_g17(envelope)
          << (dec.v_hat <= envelope ? " (holds on this path)\n"
                                    : " (exceeded on this path)\n");
      if (stats.x_hat && stats.c2_hat) {
        bounds::UpperBoundInputs uin;
        uin.alpha = hyper.alpha;
        uin.beta = hyper.beta;
        uin.gamma = hyper.gamma;
        uin.x_star = *stats.x_hat;
        uin.sigma2 = problem.noise_variance();
        uin.p2 = stats.p2_hat;
        uin.c1 = stats.c1_hat;
        uin.c2 = *stats.c2_hat;
        const bounds::UpperConstants uc = bounds::upper_constants(uin);
        const double floor_env = uc.e / horizon +
                                 uc.f / cfg.validate_batch - uc.g;
        rep << "envelope.lower = " << format_g17(floor_env)
            << (dec.v_hat >= floor_env ? " (holds on this path)\n"
                                       : " (undershot on this path)\n");
      }
    }

    const AssumptionAudit audit =
        assumption_audit(problem, traj, stats, cfg.eps, cfg.delta);
    std::ostringstream audit_os;
    write_audit_report(audit, audit_os);
    {
      std::ostringstream res_os;
      write_residuals_csv(identity, res_os);
      write_file(dir / ("residuals_" + name + ".csv"), res_os.str());
      std::ostringstream traj_os;
      write_trajectory_csv(traj, traj_os);
      write_file(dir / ("trajectory_" + name + ".csv"), traj_os.str());
      write_file(dir / ("audit_" + name + ".txt"), audit_os.str());
    }
    std::istringstream audit_lines(audit_os.str());
    for (std::string line; std::getline(audit_lines, line);)
      rep << "audit." << line << "\n";
    if ((variant == RuleVariant::AmsGrad || variant == RuleVariant::AmsBound) &&
        audit.a1_violations != 0) {
      ok = false;
      failing_what = name + " (A1) monotonicity";
    }
  }

  rep << "\nresult = " << (ok ? "pass" : ("fail: " + failing_what)) << "\n";
  if (!ok && failing_step >= 0) rep << "failing_step = " << failing_step << "\n";
  write_file(dir / "report.txt", rep.str());
  std::cout << rep.str();
  return ok ? kExitOk : kExitAssertionFailure;
}

}  // namespace sfo::cli
