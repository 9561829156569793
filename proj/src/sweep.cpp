#include "sfobench/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "sfobench/csv.hpp"

namespace sfo {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Timeout: return "timeout";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

SweepRecord steps_to_threshold(const Problem& problem,
                               const PreconditionerRule& rule,
                               const HyperParams& hyper, long long batch,
                               double tau, long budget_epochs,
                               long steps_per_epoch, std::uint64_t seed,
                               SamplingMode sampling,
                               const std::optional<ParamVector>& theta0) {
  if (tau < 0) throw std::invalid_argument("tau must be >= 0");
  if (budget_epochs < 1)
    throw std::invalid_argument("budget must be >= 1 epoch");
  const bool finite_sum = problem.kind() == ProblemKind::FiniteSumMlp;
  const long epoch_steps =
      finite_sum ? (problem.sample_count() + batch - 1) / batch
                 : steps_per_epoch;
  if (epoch_steps < 1) throw std::invalid_argument("empty epoch");

  RunOptions opts;
  opts.batch = static_cast<int>(batch);
  opts.stop = StopCondition::loss_threshold(tau, budget_epochs * epoch_steps);
  opts.seed = seed;
  opts.record = RecordMode::Scalars;
  opts.sampling = sampling;
  opts.theta0 = theta0;
  opts.loss_every = finite_sum ? epoch_steps : 1;

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj = run(problem, hyper, rule, opts);
  const auto t1 = std::chrono::steady_clock::now();

  SweepRecord rec;
  rec.batch = batch;
  rec.seed = seed;
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  for (auto it = traj.losses.rbegin(); it != traj.losses.rend(); ++it)
    if (!std::isnan(*it)) {
      last_loss = *it;
      break;
    }
  rec.terminal_loss = last_loss;
  if (traj.fault) {
    rec.status = RunStatus::Diverged;
    return rec;
  }
  const long k = traj.executed_steps();
  if (!std::isnan(last_loss) && last_loss <= tau &&
      !std::isnan(traj.losses.back())) {
    rec.status = RunStatus::Ok;
    rec.steps = k;
    rec.sfo = static_cast<long long>(k) * batch;
  } else {
    rec.status = RunStatus::Timeout;
  }
  return rec;
}

namespace {

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int extra = std::min<int>(workers, static_cast<int>(n)) - 1;
  std::vector<std::thread> pool;
  pool.reserve(extra);
  for (int w = 0; w < extra; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Median K and Kb per batch size over ok records, ascending in b.
std::vector<BatchSummary> group_medians(
    const std::vector<SweepRecord>& records) {
  std::map<long long, std::vector<const SweepRecord*>> groups;
  for (const SweepRecord& r : records) groups[r.batch].push_back(&r);
  std::vector<BatchSummary> out;
  for (auto& [batch, group] : groups) {
    BatchSummary s;
    s.batch = batch;
    s.n_total = static_cast<int>(group.size());
    std::vector<double> ks, sfos;
    for (const SweepRecord* r : group)
      if (r->status == RunStatus::Ok && r->steps) {
        ks.push_back(static_cast<double>(*r->steps));
        sfos.push_back(static_cast<double>(*r->sfo));
      }
    s.n_ok = static_cast<int>(ks.size());
    if (!ks.empty()) {
      s.k_median = median(ks);
      s.sfo_median = median(sfos);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<SweepRecord> sfo_sweep(const Problem& problem,
                                   const PreconditionerRule& rule,
                                   const HyperParams& hyper,
                                   const SweepConfig& config) {
  if (config.batches.empty())
    throw std::invalid_argument("batch list must be non-empty");
  if (!std::is_sorted(config.batches.begin(), config.batches.end()))
    throw std::invalid_argument("batch list must be sorted ascending");
  if (config.seeds_per_batch < 1)
    throw std::invalid_argument("seeds_per_batch must be >= 1");

  struct Job {
    long long batch;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (long long b : config.batches)
    for (int rep = 0; rep < config.seeds_per_batch; ++rep) {
      const std::uint64_t run_seed = mix64(
          mix64(config.master_seed ^ mix64(std::uint64_t(b))) ^
          std::uint64_t(rep));
      jobs.push_back({b, run_seed});
    }

  std::vector<SweepRecord> records(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    records[i] = steps_to_threshold(
        problem, rule, hyper, jobs[i].batch, config.tau, config.budget_epochs,
        config.steps_per_epoch, jobs[i].seed, config.sampling, config.theta0);
  });
  return records;
}

std::vector<BatchSummary> summarize(const std::vector<SweepRecord>& records) {
  return group_medians(records);
}

CriticalBatchEstimate estimate_critical_batch(
    const std::vector<SweepRecord>& records) {
  const std::vector<BatchSummary> summaries = group_medians(records);
  CriticalBatchEstimate best;
  bool found = false;
  for (const BatchSummary& s : summaries) {
    if (!s.sfo_median) continue;
    if (!found || *s.sfo_median < best.min_sfo) {
      best.batch = s.batch;  // groups are ascending: ties keep the smaller b
      best.min_sfo = *s.sfo_median;
      found = true;
    }
  }
  if (!found)
    throw NoDataError("no non-timeout records to locate a critical batch");
  return best;
}

long long detect_perfect_scaling(const std::vector<SweepRecord>& records,
                                 double tol) {
  std::vector<BatchSummary> summaries = group_medians(records);
  std::erase_if(summaries, [](const BatchSummary& s) { return !s.k_median; });
  if (summaries.size() < 2)
    throw NoDataError("need at least two usable batch sizes");
  for (std::size_t i = 0; i + 1 < summaries.size(); ++i)
    if (summaries[i + 1].batch != 2 * summaries[i].batch)
      throw std::invalid_argument(
          "records must cover consecutive doublings of b");
  long long end = summaries[0].batch;
  for (std::size_t i = 0; i + 1 < summaries.size(); ++i) {
    const double ratio = *summaries[i + 1].k_median / *summaries[i].k_median;
    if (ratio < 0.5 - tol || ratio > 0.5 + tol) break;
    end = summaries[i + 1].batch;
  }
  return end;
}

RationalFit fit_rational(const std::vector<SweepRecord>& records) {
  std::vector<std::pair<double, double>> pts;  // (b, K)
  for (const SweepRecord& r : records)
    if (r.status == RunStatus::Ok && r.steps)
      pts.emplace_back(static_cast<double>(r.batch),
                       static_cast<double>(*r.steps));
  return fit_rational_points(pts);
}

RationalFit fit_rational_points(
    const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 4)
    throw FitError("rational fit needs >= 4 non-timeout records, got " +
                   std::to_string(pts.size()));

  // With c = 1, K b = a b + b0 K: ordinary least squares in (a, b0).
  double sbb = 0, sbk = 0, skk = 0, sby = 0, sky = 0;
  for (auto [b, k] : pts) {
    const double y = k * b;
    sbb += b * b;
    sbk += b * k;
    skk += k * k;
    sby += b * y;
    sky += k * y;
  }
  const double det = sbb * skk - sbk * sbk;
  const double scale = std::max(sbb * skk, sbk * sbk);
  if (!(std::abs(det) > 1e-12 * scale))
    throw FitError("singular normal equations: batch/step design is "
                   "ill-conditioned (det " +
                   format_g17(det) + ")");
  RationalFit fit;
  fit.a_hat = (sby * skk - sky * sbk) / det;
  fit.b_hat = (sbb * sky - sbk * sby) / det;
  fit.c_hat = 1.0;
  fit.asymptote = fit.a_hat / fit.c_hat;
  fit.critical_batch = 2.0 * fit.b_hat / fit.c_hat;
  fit.points = static_cast<int>(pts.size());

  double rss = 0.0;
  for (auto [b, k] : pts) {
    const double denom = fit.c_hat * b - fit.b_hat;
    if (!(denom > 0))
      throw FitError("fitted pole c b - b0 <= 0 at batch " + format_g17(b));
    const double r = k - fit.a_hat * b / denom;
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

void write_records_csv(const std::vector<SweepRecord>& records,
                       std::ostream& os, bool include_timing) {
  CsvWriter w(os, {"b", "seed", "K", "sfo", "terminal_loss", "wall_time_s",
                   "status"});
  for (const SweepRecord& r : records) {
    w.begin_row();
    w.cell(r.batch);
    w.cell(static_cast<long long>(r.seed));
    if (r.steps) w.cell(static_cast<long long>(*r.steps)); else w.cell_empty();
    if (r.sfo) w.cell(*r.sfo); else w.cell_empty();
    w.cell(r.terminal_loss);
    w.cell(include_timing ? r.wall_time_s : 0.0);
    w.cell(to_string(r.status));
    w.end_row();
  }
}

void write_summary_csv(const std::vector<BatchSummary>& summaries,
                       std::ostream& os) {
  CsvWriter w(os, {"b", "K_median", "sfo_median", "n_ok"});
  for (const BatchSummary& s : summaries) {
    w.begin_row();
    w.cell(s.batch);
    if (s.k_median) w.cell(*s.k_median); else w.cell_empty();
    if (s.sfo_median) w.cell(*s.sfo_median); else w.cell_empty();
    w.cell(static_cast<long long>(s.n_ok));
    w.end_row();
  }
}

}  // namespace sfo
