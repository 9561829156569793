#pragma once

#include <optional>

#include "sfobench/optimizer.hpp"
#include "sfobench/problem.hpp"

namespace sfo {

// Empirical instantiations of the constants the bound formulas consume.
// All "hat" quantities are observed maxima/means over a finished trajectory,
// not proven bounds; downstream bound evaluations are labeled
// "empirical-constant" in output.
struct OracleStats {
  double sigma2_hat = 0.0;            // Monte Carlo noise second moment
  double p2_hat = 0.0;                // max_k ||grad L(theta_k)||^2
  std::optional<double> dist_hat;     // max_i sup_k (theta_{k,i}-theta_i)^2
  double h0_star = 0.0;               // min initial preconditioner entry
  double h_cap = 0.0;                 // max observed preconditioner entry
  double c1_hat = 0.0;                // tightest (U1)-style constant in [0,1]
  std::optional<double> c2_hat;       // tightest (U2)-style constant, >= 0
  std::optional<double> x_hat;        // (U3)-style margin, flagged if <= 0
  bool x_hat_nonpositive = false;
  bool reference_missing = false;     // dist/c2/x absent: no reference point
};

// Estimates every field from a Full-mode trajectory. `samples` bounds the
// Monte Carlo budget for sigma2_hat. The reference point defaults to the
// problem's known minimizer; fields needing it are flagged absent otherwise.
OracleStats estimate_oracle_stats(
    const Problem& problem, const Trajectory& traj, long samples,
    const std::optional<ParamVector>& reference = std::nullopt);

}  // namespace sfo
