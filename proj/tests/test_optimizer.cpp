#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sfobench/optimizer.hpp"

using namespace sfo;

TEST_CASE("clamp") {
  CHECK(clamp(0.5, 0.0, 1.0) == 0.5);
  CHECK(clamp(-1.0, 0.0, 1.0) == 0.0);
  CHECK(clamp(2.0, 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS((void)clamp(0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sgd and momentum rules keep the identity diagonal") {
  OptimizerState st = init_state({0.3, -0.7});
  HyperParams hyper;
  ParamVector grad = {2.0, -1.0};
  for (RuleVariant v : {RuleVariant::Sgd, RuleVariant::Momentum}) {
    PreconditionerRule rule{v};
    ParamVector h = update_preconditioner(rule, hyper, st, grad, grad);
    CHECK(h == ParamVector{1.0, 1.0});
  }
}

TEST_CASE("amsgrad recursion, one step by hand") {
  // v = 0.999*0 + 0.001*(4, 0) = (0.004, 0); v_hat = v;
  // h = (sqrt(0.004), floor) = (0.06324555320336759, 1e-8)
  OptimizerState st = init_state({0.0, 0.0});
  HyperParams hyper;
  hyper.eta = 0.999;
  PreconditionerRule rule{RuleVariant::AmsGrad};
  ParamVector grad = {2.0, 0.0};
  ParamVector h = update_preconditioner(rule, hyper, st, grad, grad);
  CHECK(st.v[0] == doctest::Approx(0.004).epsilon(1e-14));
  CHECK(st.v[1] == 0.0);
  CHECK(st.v_hat[0] == st.v[0]);
  CHECK(h[0] == doctest::Approx(0.06324555320336759).epsilon(1e-14));
  CHECK(h[1] == 1e-8);
}

TEST_CASE("amsgrad preconditioner entries never decrease") {
  OptimizerState st = init_state(ParamVector(5, 0.0));
  HyperParams hyper;
  hyper.eta = 0.9;
  PreconditionerRule rule{RuleVariant::AmsGrad};
  RandomStream rs(12345);
  ParamVector prev;
  for (int k = 0; k < 200; ++k) {
    ParamVector grad(5);
    for (double& g : grad) g = 3.0 * rs.next_gaussian();
    ParamVector h = update_preconditioner(rule, hyper, st, grad, grad);
    if (!prev.empty())
      for (int i = 0; i < 5; ++i) CHECK(h[i] >= prev[i]);
    prev = h;
    st.step = k + 1;
  }
}

TEST_CASE("amsbound clamps the reciprocal step and stays monotone") {
  OptimizerState st = init_state(ParamVector(3, 0.0));
  HyperParams hyper;
  hyper.eta = 0.99;
  PreconditionerRule rule{RuleVariant::AmsBound};
  rule.bound_scale = 0.1;
  RandomStream rs(999);
  ParamVector prev;
  for (int k = 0; k < 300; ++k) {
    ParamVector grad(3);
    for (double& g : grad) g = 0.05 * rs.next_gaussian();
    ParamVector h = update_preconditioner(rule, hyper, st, grad, grad);
    for (double v : h) {
      CHECK(v > 0.0);
      CHECK(std::isfinite(v));
    }
    if (!prev.empty())
      for (int i = 0; i < 3; ++i) CHECK(h[i] >= prev[i]);
    prev = h;
    st.step = k + 1;
  }
  // tiny gradients make 1/sqrt(v_hat) exceed u_k, so the clamp binds and
  // h = 1/u_k; the last update ran at k = 299
  const double u299 = 0.1 * (1.0 + 1.0 / ((1.0 - 0.99) * 299.0));
  for (double v : prev) CHECK(v == doctest::Approx(1.0 / u299).epsilon(1e-12));
}

TEST_CASE("sgd step is vanilla gradient descent") {
  OptimizerState st = init_state({1.0, -2.0});
  HyperParams hyper;
  hyper.alpha = 0.1;
  PreconditionerRule rule{RuleVariant::Sgd};
  step(st, {0.5, 1.0}, hyper, rule);
  CHECK(st.theta[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-15));
  CHECK(st.theta[1] == doctest::Approx(-2.0 - 0.1 * 1.0).epsilon(1e-15));
  CHECK(st.step == 1);
}

TEST_CASE("momentum update by hand, gamma = 0 keeps m_hat = m") {
  OptimizerState st = init_state({0.0, 0.0});
  st.m_prev = {1.0, 0.0};
  HyperParams hyper;
  hyper.beta = 0.9;
  hyper.gamma = 0.0;
  PreconditionerRule rule{RuleVariant::Momentum};
  StepRecord rec = step(st, {0.0, 1.0}, hyper, rule);
  CHECK(rec.m[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(rec.m[1] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(rec.m_hat == rec.m);
}

TEST_CASE("bias correction at step zero divides by 1 - gamma") {
  OptimizerState st = init_state({0.0});
  HyperParams hyper;
  hyper.beta = 0.0;
  hyper.gamma = 0.9;
  PreconditionerRule rule{RuleVariant::Adam};
  StepRecord rec = step(st, {1.0}, hyper, rule);
  // m_hat_0 = m_0 / (1 - 0.9^1) = 10 m_0
  CHECK(rec.m_hat[0] == doctest::Approx(10.0 * rec.m[0]).epsilon(1e-14));
}

TEST_CASE("noiseless quadratic with sgd decays geometrically, K = 22") {
  // theta_k = 0.9^k, L = 0.5*0.81^k <= 0.005 first at k = 22
  Problem p = Problem::noisy_quadratic(1, 0.0);
  HyperParams hyper;
  hyper.alpha = 0.1;
  PreconditionerRule rule{RuleVariant::Sgd};
  RunOptions opts;
  opts.stop = StopCondition::loss_threshold(0.005, 1000);
  opts.theta0 = ParamVector{1.0};
  Trajectory traj = run(p, hyper, rule, opts);
  CHECK(traj.executed_steps() == 22);
  CHECK(traj.losses.back() <= 0.005);
  CHECK_FALSE(traj.fault.has_value());
}

TEST_CASE("zero-step stop leaves only the initial point") {
  Problem p = Problem::noisy_quadratic(2, 1.0);
  HyperParams hyper;
  PreconditionerRule rule{RuleVariant::Sgd};
  RunOptions opts;
  opts.stop = StopCondition::steps(0);
  Trajectory traj = run(p, hyper, rule, opts);
  CHECK(traj.executed_steps() == 0);
  CHECK(traj.steps.empty());
  CHECK(traj.final_theta == ParamVector(2, 1.0));
}

TEST_CASE("the same seed reproduces the trajectory bit for bit") {
  Problem p = Problem::noisy_quadratic(6, 3.0);
  HyperParams hyper;
  hyper.alpha = 0.01;
  hyper.beta = 0.9;
  hyper.gamma = 0.9;
  PreconditionerRule rule{RuleVariant::Adam};
  RunOptions opts;
  opts.batch = 4;
  opts.stop = StopCondition::steps(200);
  opts.seed = 77;
  Trajectory a = run(p, hyper, rule, opts);
  Trajectory b = run(p, hyper, rule, opts);
  REQUIRE(a.steps.size() == b.steps.size());
  CHECK(a.final_theta == b.final_theta);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].theta == b.steps[k].theta);
    CHECK(a.steps[k].grad == b.steps[k].grad);
    CHECK(a.steps[k].h == b.steps[k].h);
  }
}

TEST_CASE("momentum with beta = 0 equals sgd stepwise") {
  Problem p = Problem::noisy_quadratic(4, 2.0);
  HyperParams hyper;
  hyper.alpha = 0.05;
  RunOptions opts;
  opts.batch = 2;
  opts.stop = StopCondition::steps(100);
  opts.seed = 5;
  Trajectory sgd = run(p, hyper, PreconditionerRule{RuleVariant::Sgd}, opts);
  Trajectory mom =
      run(p, hyper, PreconditionerRule{RuleVariant::Momentum}, opts);
  REQUIRE(sgd.steps.size() == mom.steps.size());
  for (std::size_t k = 0; k < sgd.steps.size(); ++k)
    CHECK(sgd.steps[k].theta == mom.steps[k].theta);
}

TEST_CASE("degenerate accumulator settings stay finite via the floor") {
  Problem p = Problem::noisy_quadratic(3, 1.0);
  HyperParams hyper;
  hyper.alpha = 1e-3;
  hyper.eta = 0.0;
  hyper.zeta = 0.0;
  RunOptions opts;
  opts.batch = 2;
  opts.stop = StopCondition::steps(50);
  opts.seed = 11;
  for (RuleVariant v :
       {RuleVariant::AdaBelief, RuleVariant::AmsGrad, RuleVariant::Adam}) {
    HyperParams h = hyper;
    if (v == RuleVariant::AmsGrad) h.zeta = 0.999;
    Trajectory traj = run(p, h, PreconditionerRule{v}, opts);
    CHECK_FALSE(traj.fault.has_value());
    CHECK(all_finite(traj.final_theta));
    for (const StepRecord& r : traj.steps)
      for (double hv : r.h) CHECK(hv >= h.epsilon_num);
  }
}

TEST_CASE("weighted preconditioner monotonicity holds for the ams rules") {
  Problem p = Problem::noisy_quadratic(5, 2.0);
  HyperParams hyper;
  hyper.alpha = 0.01;
  hyper.beta = 0.9;
  RunOptions opts;
  opts.batch = 4;
  opts.stop = StopCondition::steps(300);
  opts.seed = 17;
  for (RuleVariant v : {RuleVariant::AmsGrad, RuleVariant::AmsBound}) {
    Trajectory traj = run(p, hyper, PreconditionerRule{v}, opts);
    for (std::size_t k = 1; k < traj.steps.size(); ++k) {
      const double gp = 1.0 - std::pow(hyper.gamma, double(k));
      const double gc = 1.0 - std::pow(hyper.gamma, double(k + 1));
      for (int i = 0; i < 5; ++i)
        CHECK(gc * traj.steps[k].h[i] >= gp * traj.steps[k - 1].h[i]);
    }
  }
}

TEST_CASE("search-direction bound holds pathwise for every rule") {
  Problem p = Problem::noisy_quadratic(6, 2.0);
  RunOptions opts;
  opts.batch = 4;
  opts.stop = StopCondition::steps(200);
  opts.seed = 23;
  for (RuleVariant v :
       {RuleVariant::Sgd, RuleVariant::Momentum, RuleVariant::AmsGrad,
        RuleVariant::AmsBound, RuleVariant::Adam, RuleVariant::AdaBelief}) {
    HyperParams hyper;
    hyper.alpha = 1e-3;
    if (v != RuleVariant::Sgd) hyper.beta = 0.9;
    if (v == RuleVariant::Adam || v == RuleVariant::AdaBelief)
      hyper.gamma = 0.9;
    Trajectory traj = run(p, hyper, PreconditionerRule{v}, opts);
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
      const StepRecord& r = traj.steps[k];
      const double gamma_k = 1.0 - std::pow(hyper.gamma, double(k + 1));
      const double hmin = *std::min_element(r.h.begin(), r.h.end());
      const double lhs = weighted_norm2(r.d, r.h) * gamma_k * gamma_k * hmin;
      const double rhs = norm2(r.m);
      CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }
  }
}

TEST_CASE("a too-large step diverges and reports the faulting step") {
  Problem p = Problem::noisy_quadratic(1, 0.0);
  HyperParams hyper;
  hyper.alpha = 2.5;  // |1 - 2.5| = 1.5: iterates oscillate outward
  PreconditionerRule rule{RuleVariant::Sgd};
  RunOptions opts;
  opts.stop = StopCondition::steps(5000);
  opts.theta0 = ParamVector{1.0};
  Trajectory traj = run(p, hyper, rule, opts);
  REQUIRE(traj.fault.has_value());
  CHECK(traj.fault->step > 0);
  CHECK(traj.fault->step < 5000);
  CHECK(static_cast<long>(traj.steps.size()) == traj.fault->step);
}

TEST_CASE("trajectory csv has the documented columns") {
  Problem p = Problem::noisy_quadratic(2, 1.0);
  HyperParams hyper;
  hyper.alpha = 0.05;
  RunOptions opts;
  opts.stop = StopCondition::steps(3);
  opts.seed = 2;
  Trajectory traj = run(p, hyper, PreconditionerRule{RuleVariant::Sgd}, opts);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "k,loss,grad_norm,m_norm,d_norm,h_min,h_max");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("hyperparameter validation reports every violation") {
  PreconditionerRule rule{RuleVariant::Sgd};
  HyperParams hyper;
  hyper.alpha = -1.0;
  hyper.beta = 0.9;
  hyper.gamma = 1.0;
  auto errors = validate_hyper(rule, hyper);
  CHECK(errors.size() == 4);  // alpha, gamma range, sgd beta, sgd gamma
}
