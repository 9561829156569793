#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfobench/problem.hpp"
#include "sfobench/vec.hpp"

namespace sfo {

// Raised when an update produces a non-finite intermediate; carries the step
// index at which the run blew up.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(long step)
      : std::runtime_error("non-finite update at step " + std::to_string(step)),
        step(step) {}
  long step;
};

struct HyperParams {
  double alpha = 1e-3;        // learning rate, > 0
  double beta = 0.0;          // momentum coefficient, [0,1)
  double gamma = 0.0;         // bias-correction coefficient, [0,1)
  double eta = 0.999;         // second-moment decay, [0,1)
  double zeta = 0.999;        // second-moment bias coefficient, [0,1)
  double epsilon_num = 1e-8;  // positive floor for preconditioner entries
};

enum class RuleVariant { Sgd, Momentum, AmsGrad, AmsBound, Adam, AdaBelief };

std::string to_string(RuleVariant v);
std::optional<RuleVariant> rule_from_string(const std::string& name);

struct PreconditionerRule {
  RuleVariant variant = RuleVariant::Sgd;
  // AmsBound clamp schedules. Defaults follow the usual construction
  // l_k = scale(1 - 1/((1-eta)k + 1)), u_k = scale(1 + 1/((1-eta)k)).
  double bound_scale = 0.1;
  std::function<double(long)> lower_bound;  // optional override, by step
  std::function<double(long)> upper_bound;
};

// Rule/hyperparameter compatibility (Sgd forces beta = gamma = 0, Momentum
// and the AMS variants force gamma = 0, plus the documented ranges). Returns
// every violation, not just the first.
std::vector<std::string> validate_hyper(const PreconditionerRule& rule,
                                        const HyperParams& hyper);

// C(x, l, u): l if x < l, x inside, u if x > u. Requires l <= u.
double clamp(double x, double lower, double upper);

struct OptimizerState {
  long step = 0;
  ParamVector theta;
  ParamVector m_prev;  // m_{k-1}, zero at step 0
  ParamVector v;       // second-moment EMA (AmsGrad/AmsBound/Adam)
  ParamVector v_hat;   // running elementwise max (AmsGrad/AmsBound)
  ParamVector s;       // belief EMA (AdaBelief)
  ParamVector h;       // diagonal preconditioner entries, > 0 elementwise
};

OptimizerState init_state(const ParamVector& theta0);

// Applies the selected diagonal rule, updating the accumulators in `state`
// and returning the new diagonal entries (floored at hyper.epsilon_num).
ParamVector update_preconditioner(const PreconditionerRule& rule,
                                  const HyperParams& hyper,
                                  OptimizerState& state,
                                  const ParamVector& grad,
                                  const ParamVector& m_current);

// Everything produced by one update, recorded for the diagnostics module.
struct StepRecord {
  ParamVector theta;   // theta_k, before the update
  ParamVector grad;    // minibatch gradient actually used
  ParamVector m_prev;  // m_{k-1}
  ParamVector m;       // m_k
  ParamVector m_hat;   // m_k / (1 - gamma^{k+1})
  ParamVector h;       // diag H_k
  ParamVector d;       // search direction
  std::optional<double> loss;  // full objective at theta_k when evaluated
};

// One iteration: m_k = beta m_{k-1} + (1-beta) g; m_hat = m_k/(1-gamma^{k+1});
// H_k per rule; d solves H_k d = -m_hat elementwise; theta += alpha d.
// Throws DivergenceError when the update goes non-finite.
StepRecord step(OptimizerState& state, const ParamVector& grad_estimate,
                const HyperParams& hyper, const PreconditionerRule& rule);

struct StopCondition {
  std::optional<double> tau;   // stop once full loss <= tau
  std::optional<long> max_steps;

  static StopCondition loss_threshold(double tau, long max_steps) {
    return StopCondition{tau, max_steps};
  }
  static StopCondition steps(long n) { return StopCondition{{}, n}; }
};

enum class RecordMode { Full, Scalars };

struct RunOptions {
  int batch = 1;
  StopCondition stop = StopCondition::steps(0);
  std::uint64_t seed = 0;
  RecordMode record = RecordMode::Full;
  SamplingMode sampling = SamplingMode::WithReplacement;
  std::optional<ParamVector> theta0;
  long loss_every = 1;  // full-objective evaluation cadence in steps
};

struct DivergenceFault {
  long step = 0;
};

struct Trajectory {
  std::vector<StepRecord> steps;  // empty in Scalars mode
  std::vector<double> losses;     // evaluated losses, NaN where skipped
  ParamVector final_theta;
  HyperParams hyper;
  PreconditionerRule rule;
  int batch = 1;
  std::uint64_t seed = 0;
  std::optional<DivergenceFault> fault;

  long executed_steps() const { return static_cast<long>(losses.size()) - 1; }
  // theta_k for any k up to executed_steps (Full mode).
  const ParamVector& theta_at(long k) const {
    return k < static_cast<long>(steps.size()) ? steps[k].theta : final_theta;
  }
};

// Iterates step() with fresh minibatch gradients until the stop condition
// triggers. Deterministic given the seed. A divergence fault is recorded on
// the returned (partial) trajectory rather than thrown.
Trajectory run(const Problem& problem, const HyperParams& hyper,
               const PreconditionerRule& rule, const RunOptions& opts);

// Line-per-step CSV: k, loss, grad_norm, m_norm, d_norm, h_min, h_max.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace sfo
