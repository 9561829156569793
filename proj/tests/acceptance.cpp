// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 spawns the CLI binary passed as argv[1].

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "sfobench/bounds.hpp"
#include "sfobench/diagnostics.hpp"
#include "sfobench/golden_section.hpp"
#include "sfobench/sweep.hpp"

using namespace sfo;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

HyperParams hyper_for(RuleVariant v) {
  HyperParams h;
  h.alpha = 1e-3;
  h.beta = v == RuleVariant::Sgd ? 0.0 : 0.9;
  h.gamma =
      (v == RuleVariant::Adam || v == RuleVariant::AdaBelief) ? 0.9 : 0.0;
  h.eta = 0.999;
  h.zeta = 0.999;
  return h;
}

const RuleVariant kAllRules[] = {RuleVariant::Sgd,      RuleVariant::Momentum,
                                 RuleVariant::AmsGrad,  RuleVariant::AmsBound,
                                 RuleVariant::Adam,     RuleVariant::AdaBelief};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// 1: max scaled per-step identity residual < 1e-9 for all six rules on the
// noisy quadratic (d=20, sigma^2=4, b=16, 1e3 steps), in under 10 s.
void criterion_identity_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Problem p = Problem::noisy_quadratic(20, 4.0);
  const ParamVector theta_ref = *p.reference_point();
  double worst = 0.0;
  std::string worst_rule;
  bool ok = true;
  for (RuleVariant v : kAllRules) {
    RunOptions opts;
    opts.batch = 16;
    opts.stop = StopCondition::steps(1000);
    opts.seed = 11;
    Trajectory traj = run(p, hyper_for(v), PreconditionerRule{v}, opts);
    if (traj.fault) {
      ok = false;
      worst_rule = to_string(v) + " diverged";
      break;
    }
    IdentityReport rep = pathwise_identity_residuals(traj, theta_ref);
    if (rep.max_scaled > worst) {
      worst = rep.max_scaled;
      worst_rule = to_string(v);
    }
  }
  const double elapsed = seconds_since(t0);
  ok = ok && worst < 1e-9 && elapsed < 10.0;
  std::ostringstream os;
  os << "identity suite: max scaled residual " << worst << " (" << worst_rule
     << ") < 1e-9, " << elapsed << " s < 10 s";
  report(1, ok, os.str());
}

// 2: noiseless decomposition residual < 1e-8 scaled at K = 500, every rule.
void criterion_noiseless_decomposition() {
  Problem p = Problem::noisy_quadratic(20, 0.0);
  const ParamVector theta_ref = *p.reference_point();
  double worst = 0.0;
  std::string worst_rule;
  for (RuleVariant v : kAllRules) {
    RunOptions opts;
    opts.batch = 1;
    opts.stop = StopCondition::steps(501);
    opts.seed = 13;
    Trajectory traj = run(p, hyper_for(v), PreconditionerRule{v}, opts);
    DecompositionReport rep = decompose_v(p, traj, theta_ref, 500);
    if (rep.scaled_residual() > worst) {
      worst = rep.scaled_residual();
      worst_rule = to_string(v);
    }
  }
  std::ostringstream os;
  os << "noiseless decomposition: max scaled residual " << worst << " ("
     << worst_rule << ") < 1e-8 at K=500";
  report(2, worst < 1e-8, os.str());
}

// 3: closed-form critical batches match golden-section minimization within
// 1e-6 relative (argument and value) on 100 randomized valid constant sets;
// second finite differences >= -1e-9 scaled on 64-point grids.
void criterion_bound_curves() {
  RandomStream rs(0xacce97a);
  double worst_arg = 0.0, worst_val = 0.0, worst_dd = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    bounds::BoundConstants k;
    k.a = 0.1 + 9.9 * rs.next_unit();
    k.b = 0.01 + 4.99 * rs.next_unit();
    k.eps = 0.3 + 1.2 * rs.next_unit();
    const double u = 0.9 * rs.next_unit();
    k.c = 0.5 * u * k.eps * k.eps;
    k.d = k.c;
    k.e = 0.1 + 9.9 * rs.next_unit();
    k.f = 0.01 + 4.99 * rs.next_unit();
    k.g = rs.next_unit();
    k.delta = 0.05 + 0.95 * rs.next_unit();

    struct Side {
      double threshold;
      bounds::CriticalBatch cb;
      std::function<double(double)> curve;
    };
    std::vector<Side> sides;
    sides.push_back({k.lower_domain_threshold(),
                     bounds::critical_batch_lower(k),
                     [&k](double b) { return bounds::lower_steps(b, k); }});
    sides.push_back({k.upper_domain_threshold(),
                     bounds::critical_batch_upper(k),
                     [&k](double b) { return *bounds::upper_steps(b, k); }});
    for (const Side& side : sides) {
      const GoldenResult gr = golden_section_minimize(
          [&](double b) { return side.curve(b) * b; }, side.threshold * 1.0001,
          side.threshold * 1e4);
      worst_arg = std::max(worst_arg,
                           std::abs(gr.x - side.cb.batch) / side.cb.batch);
      worst_val = std::max(worst_val,
                           std::abs(gr.fx - side.cb.min_sfo) / side.cb.min_sfo);
      std::vector<double> grid, kv, sfo;
      const double lo = side.threshold * 1.05, hi = side.threshold * 50.0;
      for (int i = 0; i < 64; ++i) {
        const double b = lo + (hi - lo) * i / 63.0;
        grid.push_back(b);
        kv.push_back(side.curve(b));
        sfo.push_back(kv.back() * b);
      }
      worst_dd = std::min(
          {worst_dd, bounds::worst_scaled_second_difference(grid, kv),
           bounds::worst_scaled_second_difference(grid, sfo)});
    }
    ok = worst_arg <= 1e-6 && worst_val <= 1e-6 && worst_dd >= -1e-9;
  }
  std::ostringstream os;
  os << "bound curves: 100 random sets, golden-section gap (arg " << worst_arg
     << ", value " << worst_val << ") <= 1e-6, worst scaled second difference "
     << worst_dd << " >= -1e-9";
  report(3, ok, os.str());
}

// 4: Lemma-style momentum gate on the noisy quadratic (sigma^2=4, b=16,
// beta=0.9, 20 seeds): mean time-averaged ||m||^2 <= sigma^2/b + P^2 +
// 3 stderr, and the pathwise direction bound holds at every step.
void criterion_momentum_gate() {
  Problem p = Problem::noisy_quadratic(20, 4.0);
  HyperParams hyper = hyper_for(RuleVariant::AmsGrad);
  std::vector<double> averages;
  double p2 = 0.0;
  long pathwise_violations = 0;
  for (int s = 0; s < 20; ++s) {
    RunOptions opts;
    opts.batch = 16;
    opts.stop = StopCondition::steps(600);
    opts.seed = 500 + s;
    Trajectory traj =
        run(p, hyper, PreconditionerRule{RuleVariant::AmsGrad}, opts);
    OracleStats stats = estimate_oracle_stats(p, traj, 1000);
    MomentumBoundReport rep = momentum_bound_check(traj, stats, 16);
    averages.push_back(rep.mean_m2);
    p2 = std::max(p2, stats.p2_hat);
    pathwise_violations += rep.pathwise_violations;
  }
  double mean = 0.0;
  for (double a : averages) mean += a;
  mean /= averages.size();
  double var = 0.0;
  for (double a : averages) var += (a - mean) * (a - mean);
  const double stderr_mean =
      std::sqrt(var / (averages.size() - 1) / averages.size());
  const double bound = 4.0 / 16.0 + p2 + 3.0 * stderr_mean;
  const bool ok = mean <= bound && pathwise_violations == 0;
  std::ostringstream os;
  os << "momentum gate: mean ||m||^2 " << mean << " <= " << bound
     << " over 20 seeds, pathwise violations " << pathwise_violations;
  report(4, ok, os.str());
}

// 5: empirical minibatch noise second moment within 10% of sigma^2 / b for
// b in {1, 4, 16, 64} at 1e4 draws.
void criterion_variance_scaling() {
  Problem p = Problem::noisy_quadratic(20, 4.0);
  ParamVector theta(20, 0.3);
  const ParamVector g = p.full_gradient(theta);
  bool ok = true;
  std::ostringstream os;
  os << "variance scaling:";
  for (int b : {1, 4, 16, 64}) {
    double acc = 0.0;
    for (long j = 0; j < 10000; ++j) {
      ParamVector gb =
          minibatch_gradient(p, theta, b, GradKey{77, std::uint64_t(j)});
      double s = 0.0;
      for (int i = 0; i < 20; ++i) {
        const double d = gb[i] - g[i];
        s += d * d;
      }
      acc += s;
    }
    const double est = acc / 10000;
    const double target = 4.0 / b;
    ok = ok && std::abs(est - target) <= 0.10 * target;
    os << " b=" << b << ": " << est << " vs " << target << ";";
  }
  os << " all within 10% at 1e4 draws";
  report(5, ok, os.str());
}

// 6: published Adam complexities around the critical batch size.
void criterion_argmin_fixture() {
  auto make = [](long long b, long k) {
    SweepRecord r;
    r.batch = b;
    r.steps = k;
    r.sfo = k * b;
    r.status = RunStatus::Ok;
    return r;
  };
  std::vector<SweepRecord> records = {make(1 << 10, 1372), make(1 << 11, 675),
                                      make(1 << 12, 403)};
  const CriticalBatchEstimate cb = estimate_critical_batch(records);
  const bool ok = cb.batch == 2048 && cb.min_sfo == 1382400.0;
  std::ostringstream os;
  os << "argmin fixture: critical batch " << cb.batch << " == 2048, min SFO "
     << (long long)cb.min_sfo << " == 1382400 (exact)";
  report(6, ok, os.str());
}

// 7: desk-scale sweep on the noisy quadratic (d=50, sigma^2=25): median K
// halves per doubling for at least 4 consecutive doublings, the largest
// tested batch sits >= 64x beyond the scaling region, and its median SFO
// complexity exceeds the minimum by >= 20%. Under 10 minutes.
void criterion_desk_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  Problem p = Problem::noisy_quadratic(50, 25.0);
  HyperParams hyper;
  hyper.alpha = 4e-6;
  hyper.beta = 0.9;
  hyper.gamma = 0.9;
  hyper.eta = 0.999999;  // long-memory second moment: accumulated v
  hyper.zeta = 0.0;
  PreconditionerRule rule{RuleVariant::Adam};

  SweepConfig sc;
  for (int e = 0; e <= 15; ++e) sc.batches.push_back(1LL << e);
  sc.tau = 5e-3;  // keeps median K(b=1) well above 2^12
  sc.budget_epochs = 96;
  sc.steps_per_epoch = 2048;
  sc.seeds_per_batch = 5;
  sc.master_seed = 20260808;
  sc.workers = 4;
  sc.theta0 = ParamVector(50, 0.05);

  const std::vector<SweepRecord> records = sfo_sweep(p, rule, hyper, sc);
  const std::vector<BatchSummary> summaries = summarize(records);
  const double elapsed = seconds_since(t0);

  bool ok = true;
  std::ostringstream os;
  os << "desk sweep:";

  const BatchSummary& first = summaries.front();
  ok = ok && first.batch == 1 && first.k_median && *first.k_median >= 4096;
  os << " K(1)=" << (first.k_median ? *first.k_median : -1.0) << " >= 4096;";

  long long scaling_end = 0;
  try {
    scaling_end = detect_perfect_scaling(records, 0.1);
  } catch (const std::exception&) {
  }
  ok = ok && scaling_end >= 16;  // 4 doublings from b = 1
  os << " scaling region through b=" << scaling_end << " (>= 4 doublings);";

  const long long bmax = sc.batches.back();
  ok = ok && scaling_end > 0 && bmax >= 64 * scaling_end;
  os << " largest b=" << bmax << " >= 64x region end;";

  double min_sfo = 0.0, last_sfo = 0.0;
  bool have = false;
  for (const BatchSummary& s : summaries)
    if (s.sfo_median) {
      if (!have || *s.sfo_median < min_sfo) min_sfo = *s.sfo_median;
      have = true;
    }
  const BatchSummary& last = summaries.back();
  ok = ok && have && last.sfo_median;
  if (last.sfo_median) last_sfo = *last.sfo_median;
  ok = ok && last_sfo >= 1.2 * min_sfo;
  os << " Kb(bmax)=" << last_sfo << " >= 1.2 * min Kb=" << min_sfo << ";";

  // qualitative shape: median K never increases with batch size
  const double* prev = nullptr;
  for (const BatchSummary& s : summaries) {
    if (!s.k_median) {
      ok = false;
      break;
    }
    if (prev && *s.k_median > *prev) ok = false;
    prev = &*s.k_median;
  }
  os << " median K non-increasing;";

  ok = ok && elapsed < 600.0;
  os << " " << elapsed << " s < 600 s";

  // informational: measured argmin and ratio sequence
  try {
    const CriticalBatchEstimate cb = estimate_critical_batch(records);
    std::printf("  [info] measured critical batch %lld (min median Kb %.0f, "
                "%s)\n",
                cb.batch, cb.min_sfo,
                cb.batch > 1 ? "interior argmin" : "argmin at the boundary");
  } catch (const std::exception&) {
  }
  std::printf("  [info] median K per doubling:");
  for (std::size_t i = 1; i < summaries.size(); ++i)
    if (summaries[i].k_median && summaries[i - 1].k_median)
      std::printf(" %.3f", *summaries[i].k_median / *summaries[i - 1].k_median);
  std::printf("\n");

  report(7, ok, os.str());
}

// 8: fitting data generated exactly from the closed-form lower curve
// recovers the implied critical batch within 1e-6 relative.
void criterion_fit_round_trip() {
  bool ok = true;
  std::ostringstream os;

  // real-valued samples of K(b) = 3.5 b / (0.75 b - 0.8)
  std::vector<std::pair<double, double>> pts;
  for (double b : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
    pts.emplace_back(b, 3.5 * b / (0.75 * b - 0.8));
  const RationalFit real_fit = fit_rational_points(pts);
  const double target = 2.0 * 0.8 / 0.75;
  ok = ok && std::abs(real_fit.critical_batch - target) <= 1e-6 * target;
  os << "fit round-trip: implied critical batch " << real_fit.critical_batch
     << " vs " << target << " (rel err "
     << std::abs(real_fit.critical_batch - target) / target << " <= 1e-6)";

  // integer-valued samples of K(b) = 16 b / (b - 1) through sweep records
  auto make = [](long long b, long k) {
    SweepRecord r;
    r.batch = b;
    r.steps = k;
    r.sfo = k * b;
    r.status = RunStatus::Ok;
    return r;
  };
  const RationalFit int_fit = fit_rational(
      {make(2, 32), make(3, 24), make(5, 20), make(9, 18), make(17, 17)});
  ok = ok && std::abs(int_fit.critical_batch - 2.0) <= 1e-6 * 2.0;
  os << "; integer records recover " << int_fit.critical_batch << " vs 2";
  report(8, ok, os.str());
}

// 9: repeated CLI sweeps with one master seed emit byte-identical CSVs.
void criterion_determinism(const std::string& binary) {
  const fs::path dir = fs::temp_directory_path() / "sfobench_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "sweep.cfg");
    cfg << "[problem]\nkind = noisy-quadratic\ndimension = 8\nsigma2 = 2\n"
           "theta0 = 1\n[optimizer]\nrule = adam\nalpha = 0.01\nbeta = 0.9\n"
           "gamma = 0.9\n[sweep]\nbatches = 1,2,4,8,16\ntau = 0.2\n"
           "budget_epochs = 20\nsteps_per_epoch = 500\nseeds = 3\n"
           "[run]\nseed = 99\nworkers = 4\n";
  }
  auto invoke = [&](const std::string& run_dir) {
    const std::string cmd = "'" + binary + "' sweep --config '" +
                            (dir / "sweep.cfg").string() + "' --run-dir '" +
                            run_dir + "' > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc != -1 && WEXITSTATUS(rc) == 0;
  };
  auto slurp = [](const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  bool ok = invoke((dir / "a").string()) && invoke((dir / "b").string());
  long matched = 0;
  for (const char* name :
       {"records.csv", "summary.csv", "steps_vs_batch.svg",
        "sfo_vs_batch.svg"}) {
    const std::string a = slurp(dir / "a" / name);
    const std::string b = slurp(dir / "b" / name);
    ok = ok && !a.empty() && a == b;
    if (!a.empty() && a == b) ++matched;
  }
  std::ostringstream os;
  os << "determinism: repeated sweep invocations produced " << matched
     << "/4 byte-identical output files";
  report(9, ok, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-sfobench>\n");
    return 2;
  }
  criterion_identity_suite();
  criterion_noiseless_decomposition();
  criterion_bound_curves();
  criterion_momentum_gate();
  criterion_variance_scaling();
  criterion_argmin_fixture();
  criterion_desk_sweep();
  criterion_fit_round_trip();
  criterion_determinism(argv[1]);
  if (g_failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
