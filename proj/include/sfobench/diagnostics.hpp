#pragma once

#include <optional>
#include <vector>

#include "sfobench/oracle_stats.hpp"
#include "sfobench/optimizer.hpp"

namespace sfo {

// Residuals of the exact per-step identity
//   ||theta_{k+1}-theta||^2_{H_k} - ||theta_k-theta||^2_{H_k}
//   - alpha^2 ||d_k||^2_{H_k}
//   - 2 alpha [ (beta/g~_k)(theta-theta_k)^T m_{k-1}
//             + ((1-beta)/g~_k)(theta-theta_k)^T g_k ] = 0,
// which holds pathwise (pre-expectation) for every rule. Each residual is
// scaled by the largest participating term.
struct IdentityReport {
  std::vector<double> residuals;         // signed, unscaled
  std::vector<double> scaled_residuals;  // |residual| / max term
  double max_scaled = 0.0;
  long argmax_step = -1;
};

IdentityReport pathwise_identity_residuals(const Trajectory& traj,
                                           const ParamVector& theta_ref);

// Horizon decomposition of the averaged variational-inequality gap:
//   V(K) = Gamma_K/(2 a (1-b) K) + a A_K/(2 (1-b) K) + b B_K/((1-b) K)
// summed over steps k = 1..K. With a noiseless oracle the residual is zero
// up to float tolerance; with noise it reflects replacing the minibatch
// gradient by the true gradient inside V and is reported, not asserted.
struct DecompositionReport {
  long horizon = 0;
  double v_hat = 0.0;
  double gamma_term = 0.0;
  double a_term = 0.0;
  double b_term = 0.0;
  double residual = 0.0;
  double scale = 0.0;  // max |term|, for scaled comparisons
  double scaled_residual() const;
};

DecompositionReport decompose_v(const Problem& problem, const Trajectory& traj,
                                const ParamVector& theta_ref, long horizon,
                                bool use_recorded_gradients = false);

// Momentum / search-direction bounds: time-averaged ||m_k||^2 against
// sigma^2/b + P^2, time-averaged ||d_k||^2_{H_k} against the same over
// (1-gamma)^2 h0*, and the pathwise inequality
// ||d_k||^2_{H_k} g~_k^2 min_i h_{k,i} <= ||m_k||^2 at every step.
struct MomentumBoundReport {
  double mean_m2 = 0.0;
  double m_bound = 0.0;
  double mean_d2h = 0.0;
  double d_bound = 0.0;
  long pathwise_violations = 0;
  double pathwise_worst_margin = 0.0;  // max over steps of lhs - rhs
  bool mean_m_ok() const { return mean_m2 <= m_bound; }
  bool mean_d_ok() const { return mean_d2h <= d_bound; }
  bool pathwise_ok() const { return pathwise_violations == 0; }
};

MomentumBoundReport momentum_bound_check(const Trajectory& traj,
                                         const OracleStats& stats, int batch);

// Per-assumption status over a finished trajectory.
struct AssumptionAudit {
  long a1_pairs = 0;
  long a1_violations = 0;          // h_{k+1,i} < h_{k,i}
  long a1_weighted_violations = 0; // g~_{k+1} h_{k+1,i} < g~_k h_{k,i}
  double a1_violation_rate() const {
    return a1_pairs == 0 ? 0.0 : double(a1_violations) / double(a1_pairs);
  }
  double p2_hat = 0.0;
  std::optional<double> dist_hat;
  double c1_hat = 0.0;
  std::optional<double> c2_hat;
  std::optional<double> x_hat;
  bool x_hat_nonpositive = false;
  bool reference_missing = false;
  // Fraction of steps whose sample-path gap (theta_k-theta*)^T grad L falls
  // below the delta*eps^2 gate; single paths may dip below it legitimately.
  double below_gate_frequency = 0.0;
};

AssumptionAudit assumption_audit(const Problem& problem, const Trajectory& traj,
                                 const OracleStats& stats,
                                 double eps = 0.1, double delta = 0.01);

// Flat key = value text block (the audit's serialized form).
void write_audit_report(const AssumptionAudit& audit, std::ostream& os);
// CSV of per-step identity residuals: k, residual, scaled_residual.
void write_residuals_csv(const IdentityReport& report, std::ostream& os);

}  // namespace sfo
