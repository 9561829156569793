#include "sfobench/oracle_stats.hpp"

#include <algorithm>
#include <cmath>

namespace sfo {

OracleStats estimate_oracle_stats(const Problem& problem,
                                  const Trajectory& traj, long samples,
                                  const std::optional<ParamVector>& reference) {
  if (traj.steps.empty())
    throw std::invalid_argument(
        "estimate_oracle_stats needs a non-empty Full-mode trajectory");
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");

  const long n_steps = static_cast<long>(traj.steps.size());
  const int d = problem.dimension();
  OracleStats stats;

  std::optional<ParamVector> ref = reference;
  if (!ref) ref = problem.reference_point();
  stats.reference_missing = !ref.has_value();

  // sigma2: Monte Carlo noise second moments at a spread of trajectory points.
  const long n_points = std::min<long>(n_steps, 16);
  const long draws_per = std::max<long>(1, samples / n_points);
  const std::uint64_t mc_seed = mix64(traj.seed ^ 0x07ac1e57a75ULL);
  double acc = 0.0;
  long count = 0;
  for (long p = 0; p < n_points; ++p) {
    const long idx = p * (n_steps - 1) / std::max<long>(1, n_points - 1);
    const ParamVector& theta = traj.steps[idx].theta;
    const ParamVector g = problem.full_gradient(theta);
    for (long j = 0; j < draws_per; ++j) {
      RandomStream rs =
          derive_stream(mc_seed, std::uint64_t(idx), std::uint64_t(j));
      ParamVector gs = problem.stochastic_gradient(theta, rs);
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double dv = gs[i] - g[i];
        s += dv * dv;
      }
      acc += s;
      ++count;
    }
  }
  stats.sigma2_hat = acc / count;

  // p2: max squared true-gradient norm over the trajectory.
  double p2 = 0.0;
  for (const StepRecord& r : traj.steps)
    p2 = std::max(p2, norm2(problem.full_gradient(r.theta)));
  p2 = std::max(p2, norm2(problem.full_gradient(traj.final_theta)));
  stats.p2_hat = p2;

  // dist: max per-coordinate squared deviation from the reference point.
  if (ref) {
    double dist = 0.0;
    for (const StepRecord& r : traj.steps)
      for (int i = 0; i < d; ++i) {
        const double dv = r.theta[i] - (*ref)[i];
        dist = std::max(dist, dv * dv);
      }
    for (int i = 0; i < d; ++i) {
      const double dv = traj.final_theta[i] - (*ref)[i];
      dist = std::max(dist, dv * dv);
    }
    stats.dist_hat = dist;
  }

  // Preconditioner floor and cap from the recorded history.
  stats.h0_star = *std::min_element(traj.steps[0].h.begin(),
                                    traj.steps[0].h.end());
  double cap = 0.0;
  for (const StepRecord& r : traj.steps)
    cap = std::max(cap, *std::max_element(r.h.begin(), r.h.end()));
  stats.h_cap = cap;

  // c1: tightest constant with ||d_k||_{H_k}^2 >= c1 sigma^2 / b, capped to
  // [0,1]. Vacuous (= 1) when the oracle is noiseless.
  const double sigma2 = problem.noise_variance();
  if (sigma2 > 0.0) {
    double c1 = std::numeric_limits<double>::infinity();
    for (const StepRecord& r : traj.steps)
      c1 = std::min(c1, weighted_norm2(r.d, r.h) * traj.batch / sigma2);
    stats.c1_hat = std::clamp(c1, 0.0, 1.0);
  } else {
    stats.c1_hat = 1.0;
  }

  if (ref) {
    // c2: tightest constant with (theta* - theta_k)^T m_{k-1} >=
    // -c2 (sigma^2/b + P^2).
    const double denom = sigma2 / traj.batch + stats.p2_hat;
    double c2 = 0.0;
    for (const StepRecord& r : traj.steps) {
      double ip = 0.0;
      for (int i = 0; i < d; ++i)
        ip += ((*ref)[i] - r.theta[i]) * r.m_prev[i];
      if (ip < 0.0 && denom > 0.0) c2 = std::max(c2, -ip / denom);
    }
    stats.c2_hat = c2;

    // x: min over k >= 1 of (1-gamma)||theta_1 - theta*||^2_{H_1}
    //     - ||theta_{k+1} - theta*||^2_{H_k}.
    if (n_steps >= 2) {
      ParamVector diff1(d);
      for (int i = 0; i < d; ++i)
        diff1[i] = traj.steps[1].theta[i] - (*ref)[i];
      const double head =
          (1.0 - traj.hyper.gamma) * weighted_norm2(diff1, traj.steps[1].h);
      double x = std::numeric_limits<double>::infinity();
      for (long k = 1; k < n_steps; ++k) {
        const ParamVector& next = traj.theta_at(k + 1);
        ParamVector diff(d);
        for (int i = 0; i < d; ++i) diff[i] = next[i] - (*ref)[i];
        x = std::min(x, head - weighted_norm2(diff, traj.steps[k].h));
      }
      stats.x_hat = x;
      stats.x_hat_nonpositive = !(x > 0.0);
    }
  }
  return stats;
}

}  // namespace sfo
