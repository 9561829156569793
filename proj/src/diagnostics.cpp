#include "sfobench/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sfobench/csv.hpp"

namespace sfo {

namespace {

double inner(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

IdentityReport pathwise_identity_residuals(const Trajectory& traj,
                                           const ParamVector& theta_ref) {
  if (traj.steps.empty())
    throw std::invalid_argument("trajectory has no full step records");
  const std::size_t d = theta_ref.size();
  if (d != traj.final_theta.size())
    throw std::invalid_argument("theta_ref dimension mismatch");
  const double alpha = traj.hyper.alpha;
  const double beta = traj.hyper.beta;
  const double gamma = traj.hyper.gamma;

  IdentityReport rep;
  rep.residuals.reserve(traj.steps.size());
  rep.scaled_residuals.reserve(traj.steps.size());
  ParamVector diff_now(d), diff_next(d);
  for (long k = 0; k < static_cast<long>(traj.steps.size()); ++k) {
    const StepRecord& r = traj.steps[k];
    const ParamVector& next = traj.theta_at(k + 1);
    for (std::size_t i = 0; i < d; ++i) {
      diff_now[i] = r.theta[i] - theta_ref[i];
      diff_next[i] = next[i] - theta_ref[i];
    }
    const double gamma_k = 1.0 - std::pow(gamma, double(k + 1));
    const double t_next = weighted_norm2(diff_next, r.h);
    const double t_now = weighted_norm2(diff_now, r.h);
    const double t_dir = alpha * alpha * weighted_norm2(r.d, r.h);
    double ip_m = 0.0, ip_g = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      ip_m += -diff_now[i] * r.m_prev[i];
      ip_g += -diff_now[i] * r.grad[i];
    }
    const double t_cross =
        2.0 * alpha * (beta / gamma_k * ip_m + (1.0 - beta) / gamma_k * ip_g);
    const double residual = t_next - t_now - t_dir - t_cross;
    const double scale = std::max({std::abs(t_next), std::abs(t_now),
                                   std::abs(t_dir), std::abs(t_cross)});
    const double scaled = scale > 0.0 ? std::abs(residual) / scale : 0.0;
    rep.residuals.push_back(residual);
    rep.scaled_residuals.push_back(scaled);
    if (scaled > rep.max_scaled) {
      rep.max_scaled = scaled;
      rep.argmax_step = k;
    }
  }
  return rep;
}

double DecompositionReport::scaled_residual() const {
  return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

DecompositionReport decompose_v(const Problem& problem, const Trajectory& traj,
                                const ParamVector& theta_ref, long horizon,
                                bool use_recorded_gradients) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (static_cast<long>(traj.steps.size()) < horizon + 1)
    throw std::invalid_argument(
        "trajectory too short: need records for steps 1..K and theta_{K+1}");
  const std::size_t d = theta_ref.size();
  const double alpha = traj.hyper.alpha;
  const double beta_t = 1.0 - traj.hyper.beta;
  const double gamma = traj.hyper.gamma;

  double v_sum = 0.0, gamma_sum = 0.0, a_sum = 0.0, b_sum = 0.0;
  ParamVector diff_now(d), diff_next(d);
  for (long k = 1; k <= horizon; ++k) {
    const StepRecord& r = traj.steps[k];
    const ParamVector& next = traj.theta_at(k + 1);
    for (std::size_t i = 0; i < d; ++i) {
      diff_now[i] = r.theta[i] - theta_ref[i];
      diff_next[i] = next[i] - theta_ref[i];
    }
    const double gamma_k = 1.0 - std::pow(gamma, double(k + 1));
    ParamVector g = use_recorded_gradients ? r.grad
                                           : problem.full_gradient(r.theta);
    v_sum += inner(diff_now, g);
    gamma_sum += gamma_k * (weighted_norm2(diff_now, r.h) -
                            weighted_norm2(diff_next, r.h));
    a_sum += gamma_k * weighted_norm2(r.d, r.h);
    double ip_m = 0.0;
    for (std::size_t i = 0; i < d; ++i) ip_m += -diff_now[i] * r.m_prev[i];
    b_sum += ip_m;
  }

  DecompositionReport rep;
  rep.horizon = horizon;
  rep.v_hat = v_sum / horizon;
  rep.gamma_term = gamma_sum / (2.0 * alpha * beta_t * horizon);
  rep.a_term = alpha * a_sum / (2.0 * beta_t * horizon);
  rep.b_term = traj.hyper.beta * b_sum / (beta_t * horizon);
  rep.residual = rep.v_hat - (rep.gamma_term + rep.a_term + rep.b_term);
  rep.scale = std::max({std::abs(rep.v_hat), std::abs(rep.gamma_term),
                        std::abs(rep.a_term), std::abs(rep.b_term)});
  return rep;
}

MomentumBoundReport momentum_bound_check(const Trajectory& traj,
                                         const OracleStats& stats, int batch) {
  if (traj.steps.empty())
    throw std::invalid_argument("trajectory has no full step records");
  const double gamma = traj.hyper.gamma;
  MomentumBoundReport rep;
  const double noise_term = stats.sigma2_hat / batch + stats.p2_hat;
  rep.m_bound = noise_term;
  rep.d_bound = noise_term / ((1.0 - gamma) * (1.0 - gamma) * stats.h0_star);

  double sum_m2 = 0.0, sum_d2h = 0.0;
  rep.pathwise_worst_margin = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < static_cast<long>(traj.steps.size()); ++k) {
    const StepRecord& r = traj.steps[k];
    const double m2 = norm2(r.m);
    const double d2h = weighted_norm2(r.d, r.h);
    sum_m2 += m2;
    sum_d2h += d2h;
    const double gamma_k = 1.0 - std::pow(gamma, double(k + 1));
    const double hmin = *std::min_element(r.h.begin(), r.h.end());
    const double lhs = d2h * gamma_k * gamma_k * hmin;
    const double margin = lhs - m2;
    rep.pathwise_worst_margin = std::max(rep.pathwise_worst_margin, margin);
    if (lhs > m2 * (1.0 + 1e-12) + 1e-300) ++rep.pathwise_violations;
  }
  rep.mean_m2 = sum_m2 / traj.steps.size();
  rep.mean_d2h = sum_d2h / traj.steps.size();
  return rep;
}

AssumptionAudit assumption_audit(const Problem& problem, const Trajectory& traj,
                                 const OracleStats& stats, double eps,
                                 double delta) {
  if (traj.steps.empty())
    throw std::invalid_argument("trajectory has no full step records");
  AssumptionAudit audit;
  const std::size_t d = traj.final_theta.size();
  const double gamma = traj.hyper.gamma;

  for (long k = 1; k < static_cast<long>(traj.steps.size()); ++k) {
    const ParamVector& prev = traj.steps[k - 1].h;
    const ParamVector& cur = traj.steps[k].h;
    const double gk_prev = 1.0 - std::pow(gamma, double(k));
    const double gk_cur = 1.0 - std::pow(gamma, double(k + 1));
    for (std::size_t i = 0; i < d; ++i) {
      ++audit.a1_pairs;
      if (cur[i] < prev[i]) ++audit.a1_violations;
      if (gk_cur * cur[i] < gk_prev * prev[i]) ++audit.a1_weighted_violations;
    }
  }

  audit.p2_hat = stats.p2_hat;
  audit.dist_hat = stats.dist_hat;
  audit.c1_hat = stats.c1_hat;
  audit.c2_hat = stats.c2_hat;
  audit.x_hat = stats.x_hat;
  audit.x_hat_nonpositive = stats.x_hat_nonpositive;
  audit.reference_missing = stats.reference_missing;

  const std::optional<ParamVector>& ref = problem.reference_point();
  if (ref) {
    long below = 0, total = 0;
    const double gate = delta * eps * eps;
    for (long k = 1; k < static_cast<long>(traj.steps.size()); ++k) {
      const StepRecord& r = traj.steps[k];
      ParamVector g = problem.full_gradient(r.theta);
      double gap = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        gap += (r.theta[i] - (*ref)[i]) * g[i];
      if (gap < gate) ++below;
      ++total;
    }
    audit.below_gate_frequency = total == 0 ? 0.0 : double(below) / total;
  }
  return audit;
}

void write_audit_report(const AssumptionAudit& audit, std::ostream& os) {
  os << "a1_pairs = " << audit.a1_pairs << '\n';
  os << "a1_violations = " << audit.a1_violations << '\n';
  os << "a1_violation_rate = " << format_g17(audit.a1_violation_rate()) << '\n';
  os << "a1_weighted_violations = " << audit.a1_weighted_violations << '\n';
  os << "p2_hat = " << format_g17(audit.p2_hat) << '\n';
  os << "dist_hat = "
     << (audit.dist_hat ? format_g17(*audit.dist_hat) : "absent") << '\n';
  os << "c1_hat = " << format_g17(audit.c1_hat) << '\n';
  os << "c2_hat = " << (audit.c2_hat ? format_g17(*audit.c2_hat) : "absent")
     << '\n';
  os << "x_hat = " << (audit.x_hat ? format_g17(*audit.x_hat) : "absent")
     << '\n';
  os << "x_hat_nonpositive = " << (audit.x_hat_nonpositive ? "true" : "false")
     << '\n';
  os << "reference_missing = " << (audit.reference_missing ? "true" : "false")
     << '\n';
  os << "below_gate_frequency = " << format_g17(audit.below_gate_frequency)
     << '\n';
}

void write_residuals_csv(const IdentityReport& report, std::ostream& os) {
  CsvWriter w(os, {"k", "residual", "scaled_residual"});
  for (std::size_t k = 0; k < report.residuals.size(); ++k) {
    w.begin_row();
    w.cell(static_cast<long long>(k));
    w.cell(report.residuals[k]);
    w.cell(report.scaled_residuals[k]);
    w.end_row();
  }
}

}  // namespace sfo
