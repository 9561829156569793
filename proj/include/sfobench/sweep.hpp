#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sfobench/optimizer.hpp"
#include "sfobench/problem.hpp"

namespace sfo {

struct NoDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunStatus { Ok, Timeout, Diverged };

std::string to_string(RunStatus s);

// One (batch size, seed) measurement. Timeout/diverged records carry no K.
struct SweepRecord {
  long long batch = 1;
  std::uint64_t seed = 0;
  std::optional<long> steps;      // K, first step with full loss <= tau
  std::optional<long long> sfo;   // K * b, exactly, when K present
  double terminal_loss = 0.0;
  double wall_time_s = 0.0;       // measured; serialized as 0 unless enabled
  RunStatus status = RunStatus::Ok;
};

// Runs until the full objective drops to tau or the epoch budget runs out.
// The loss is evaluated every step for synthetic problems and once per epoch
// for the finite-sum kind (an epoch is ceil(n/b) steps there and
// steps_per_epoch for synthetic kinds).
SweepRecord steps_to_threshold(const Problem& problem,
                               const PreconditionerRule& rule,
                               const HyperParams& hyper, long long batch,
                               double tau, long budget_epochs,
                               long steps_per_epoch, std::uint64_t seed,
                               SamplingMode sampling,
                               const std::optional<ParamVector>& theta0 = {});

struct SweepConfig {
  std::vector<long long> batches;  // ascending
  double tau = 0.1;
  long budget_epochs = 200;
  long steps_per_epoch = 1000;  // synthetic kinds only
  int seeds_per_batch = 5;
  std::uint64_t master_seed = 1;
  int workers = 1;
  SamplingMode sampling = SamplingMode::WithReplacement;
  std::optional<ParamVector> theta0;
};

// One record per (b, seed), independent and reproducible: run seeds derive
// from (master_seed, b, replicate), and records come back in deterministic
// (b, seed) order regardless of worker scheduling.
std::vector<SweepRecord> sfo_sweep(const Problem& problem,
                                   const PreconditionerRule& rule,
                                   const HyperParams& hyper,
                                   const SweepConfig& config);

struct BatchSummary {
  long long batch = 1;
  std::optional<double> k_median;
  std::optional<double> sfo_median;
  int n_ok = 0;
  int n_total = 0;
};

std::vector<BatchSummary> summarize(const std::vector<SweepRecord>& records);

struct CriticalBatchEstimate {
  long long batch = 1;
  double min_sfo = 0.0;
};

// Smallest b attaining the minimum median Kb; timeouts excluded.
CriticalBatchEstimate estimate_critical_batch(
    const std::vector<SweepRecord>& records);

// Largest b such that every consecutive doubling up to it halves the median
// K within the tolerance: K(2b')/K(b') in [0.5-tol, 0.5+tol]. Returns the
// smallest usable b when even the first pair fails.
long long detect_perfect_scaling(const std::vector<SweepRecord>& records,
                                 double tol);

// Least-squares fit of K ~ a b / (c b - b0) with c fixed to 1 (linear in the
// remaining parameters via K b = a b + b0 K).
struct RationalFit {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double c_hat = 1.0;
  double asymptote = 0.0;       // a/c
  double critical_batch = 0.0;  // 2 b0 / c
  double residual_norm = 0.0;
  int points = 0;
};

RationalFit fit_rational(const std::vector<SweepRecord>& records);
// Core fit on raw (b, K) points; K need not be integer.
RationalFit fit_rational_points(
    const std::vector<std::pair<double, double>>& points);

// records.csv schema: b,seed,K,sfo,terminal_loss,wall_time_s,status.
// Measured wall time is only written when include_timing is set; by default
// the column reads 0 so that repeated runs are byte-identical.
void write_records_csv(const std::vector<SweepRecord>& records,
                       std::ostream& os, bool include_timing = false);
// summary.csv schema: b,K_median,sfo_median,n_ok.
void write_summary_csv(const std::vector<BatchSummary>& summaries,
                       std::ostream& os);

}  // namespace sfo
