#include "sfobench/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sfobench/csv.hpp"

namespace sfo {

std::string to_string(RuleVariant v) {
  switch (v) {
    case RuleVariant::Sgd: return "sgd";
    case RuleVariant::Momentum: return "momentum";
    case RuleVariant::AmsGrad: return "amsgrad";
    case RuleVariant::AmsBound: return "amsbound";
    case RuleVariant::Adam: return "adam";
    case RuleVariant::AdaBelief: return "adabelief";
  }
  return "unknown";
}

std::optional<RuleVariant> rule_from_string(const std::string& name) {
  if (name == "sgd") return RuleVariant::Sgd;
  if (name == "momentum") return RuleVariant::Momentum;
  if (name == "amsgrad") return RuleVariant::AmsGrad;
  if (name == "amsbound") return RuleVariant::AmsBound;
  if (name == "adam") return RuleVariant::Adam;
  if (name == "adabelief") return RuleVariant::AdaBelief;
  return std::nullopt;
}

std::vector<std::string> validate_hyper(const PreconditionerRule& rule,
                                        const HyperParams& hyper) {
  std::vector<std::string> errors;
  auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
  if (!(hyper.alpha > 0)) errors.push_back("alpha must be > 0");
  if (!in_unit(hyper.beta)) errors.push_back("beta must be in [0,1)");
  if (!in_unit(hyper.gamma)) errors.push_back("gamma must be in [0,1)");
  if (!in_unit(hyper.eta)) errors.push_back("eta must be in [0,1)");
  if (!in_unit(hyper.zeta)) errors.push_back("zeta must be in [0,1)");
  if (!(hyper.epsilon_num > 0)) errors.push_back("epsilon_num must be > 0");
  switch (rule.variant) {
    case RuleVariant::Sgd:
      if (hyper.beta != 0.0) errors.push_back("sgd requires beta = 0");
      if (hyper.gamma != 0.0) errors.push_back("sgd requires gamma = 0");
      break;
    case RuleVariant::Momentum:
      if (hyper.gamma != 0.0) errors.push_back("momentum requires gamma = 0");
      break;
    case RuleVariant::AmsGrad:
      if (hyper.gamma != 0.0) errors.push_back("amsgrad requires gamma = 0");
      break;
    case RuleVariant::AmsBound:
      if (hyper.gamma != 0.0) errors.push_back("amsbound requires gamma = 0");
      if (!(rule.bound_scale > 0))
        errors.push_back("bound_scale must be > 0");
      break;
    default:
      break;
  }
  return errors;
}

double clamp(double x, double lower, double upper) {
  if (lower > upper)
    throw std::invalid_argument("clamp requires lower <= upper");
  if (x < lower) return lower;
  if (x > upper) return upper;
  return x;
}

OptimizerState init_state(const ParamVector& theta0) {
  OptimizerState st;
  st.theta = theta0;
  st.m_prev.assign(theta0.size(), 0.0);
  return st;
}

namespace {

void ema_square(ParamVector& v, double eta, const ParamVector& x,
                std::size_t d) {
  if (v.empty()) v.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    v[i] = eta * v[i] + (1.0 - eta) * x[i] * x[i];
}

}  // namespace

ParamVector update_preconditioner(const PreconditionerRule& rule,
                                  const HyperParams& hyper,
                                  OptimizerState& state,
                                  const ParamVector& grad,
                                  const ParamVector& m_current) {
  const std::size_t d = state.theta.size();
  const double floor = hyper.epsilon_num;
  ParamVector h(d, 1.0);
  switch (rule.variant) {
    case RuleVariant::Sgd:
    case RuleVariant::Momentum:
      break;  // identity diagonal
    case RuleVariant::AmsGrad: {
      ema_square(state.v, hyper.eta, grad, d);
      if (state.v_hat.empty()) state.v_hat.assign(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        state.v_hat[i] = std::max(state.v_hat[i], state.v[i]);
        h[i] = std::max(std::sqrt(state.v_hat[i]), floor);
      }
      break;
    }
    case RuleVariant::AmsBound: {
      ema_square(state.v, hyper.eta, grad, d);
      if (state.v_hat.empty()) state.v_hat.assign(d, 0.0);
      const long k = state.step;
      const double lo = rule.lower_bound
                            ? rule.lower_bound(k)
                            : rule.bound_scale *
                                  (1.0 - 1.0 / ((1.0 - hyper.eta) * k + 1.0));
      const double hi = rule.upper_bound
                            ? rule.upper_bound(k)
                            : rule.bound_scale *
                                  (1.0 + 1.0 / ((1.0 - hyper.eta) * k));
      for (std::size_t i = 0; i < d; ++i) {
        state.v_hat[i] = std::max(state.v_hat[i], state.v[i]);
        const double inv_step = clamp(1.0 / std::sqrt(state.v_hat[i]), lo, hi);
        h[i] = std::max(1.0 / inv_step, floor);
      }
      break;
    }
    case RuleVariant::Adam: {
      ema_square(state.v, hyper.eta, grad, d);
      const double corr = 1.0 - std::pow(hyper.zeta, double(state.step + 1));
      for (std::size_t i = 0; i < d; ++i)
        h[i] = std::max(std::sqrt(state.v[i] / corr), floor);
      break;
    }
    case RuleVariant::AdaBelief: {
      if (state.s.empty()) state.s.assign(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        const double t = grad[i] - m_current[i];
        state.s[i] = hyper.eta * state.s[i] + (1.0 - hyper.eta) * t * t;
      }
      const double corr = 1.0 - std::pow(hyper.zeta, double(state.step + 1));
      for (std::size_t i = 0; i < d; ++i)
        h[i] = std::max(std::sqrt(state.s[i] / corr), floor);
      break;
    }
  }
  return h;
}

StepRecord step(OptimizerState& state, const ParamVector& grad_estimate,
                const HyperParams& hyper, const PreconditionerRule& rule) {
  const std::size_t d = state.theta.size();
  if (grad_estimate.size() != d)
    throw std::invalid_argument("gradient dimension mismatch");
  const long k = state.step;

  StepRecord rec;
  rec.theta = state.theta;
  rec.grad = grad_estimate;
  rec.m_prev = state.m_prev;

  ParamVector m(d);
  for (std::size_t i = 0; i < d; ++i)
    m[i] = hyper.beta * state.m_prev[i] + (1.0 - hyper.beta) * grad_estimate[i];

  const double gamma_k = 1.0 - std::pow(hyper.gamma, double(k + 1));
  ParamVector m_hat(d);
  for (std::size_t i = 0; i < d; ++i) m_hat[i] = m[i] / gamma_k;

  ParamVector h = update_preconditioner(rule, hyper, state, grad_estimate, m);

  // H_k is diagonal, so the solve is elementwise.
  ParamVector dir(d);
  for (std::size_t i = 0; i < d; ++i) dir[i] = -m_hat[i] / h[i];

  for (std::size_t i = 0; i < d; ++i) state.theta[i] += hyper.alpha * dir[i];

  if (!all_finite(state.theta) || !all_finite(dir) || !all_finite(m))
    throw DivergenceError(k);

  state.m_prev = std::move(m);
  state.h = h;
  state.step = k + 1;

  rec.m = state.m_prev;
  rec.m_hat = std::move(m_hat);
  rec.h = std::move(h);
  rec.d = std::move(dir);
  return rec;
}

Trajectory run(const Problem& problem, const HyperParams& hyper,
               const PreconditionerRule& rule, const RunOptions& opts) {
  if (opts.batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (opts.loss_every < 1)
    throw std::invalid_argument("loss_every must be >= 1");
  ParamVector theta0 =
      opts.theta0 ? *opts.theta0 : problem.default_initial_point();
  if (static_cast<int>(theta0.size()) != problem.dimension())
    throw std::invalid_argument("theta0 dimension mismatch");

  Trajectory traj;
  traj.hyper = hyper;
  traj.rule = rule;
  traj.batch = opts.batch;
  traj.seed = opts.seed;

  OptimizerState state = init_state(theta0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  while (true) {
    const long k = state.step;
    double loss = nan;
    if (k % opts.loss_every == 0) loss = problem.loss(state.theta);
    traj.losses.push_back(loss);
    if (opts.stop.tau && !std::isnan(loss) && loss <= *opts.stop.tau) break;
    if (opts.stop.max_steps && k >= *opts.stop.max_steps) break;
    if (!opts.stop.tau && !opts.stop.max_steps) break;  // nothing to do

    ParamVector grad = minibatch_gradient(
        problem, state.theta, opts.batch,
        GradKey{opts.seed, std::uint64_t(k)}, opts.sampling);
    try {
      StepRecord rec = step(state, grad, hyper, rule);
      if (opts.record == RecordMode::Full) {
        rec.loss = std::isnan(loss) ? std::optional<double>{} : loss;
        traj.steps.push_back(std::move(rec));
      }
    } catch (const DivergenceError& e) {
      traj.fault = DivergenceFault{e.step};
      break;
    }
  }
  traj.final_theta = state.theta;
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  CsvWriter w(os, {"k", "loss", "grad_norm", "m_norm", "d_norm", "h_min",
                   "h_max"});
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const StepRecord& r = traj.steps[k];
    const auto [hmin, hmax] = std::minmax_element(r.h.begin(), r.h.end());
    w.begin_row();
    w.cell(static_cast<long long>(k));
    if (r.loss) w.cell(*r.loss); else w.cell_empty();
    w.cell(norm(r.grad));
    w.cell(norm(r.m));
    w.cell(norm(r.d));
    w.cell(*hmin);
    w.cell(*hmax);
    w.end_row();
  }
}

}  // namespace sfo
