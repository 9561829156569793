#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfobench/bounds.hpp"
#include "sfobench/diagnostics.hpp"
#include "sfobench/oracle_stats.hpp"
#include "sfobench/sweep.hpp"

namespace py = pybind11;
using namespace sfo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive-optimizer batch-size sweeps, bound curves, and "
            "trajectory diagnostics";

  py::enum_<ProblemKind>(m, "ProblemKind")
      .value("NoisyQuadratic", ProblemKind::NoisyQuadratic)
      .value("NoisyRosenbrock", ProblemKind::NoisyRosenbrock)
      .value("FiniteSumMlp", ProblemKind::FiniteSumMlp);

  py::class_<MlpSpec>(m, "MlpSpec")
      .def(py::init<>())
      .def_readwrite("input_dim", &MlpSpec::input_dim)
      .def_readwrite("hidden_dim", &MlpSpec::hidden_dim)
      .def_readwrite("sample_count", &MlpSpec::sample_count)
      .def_readwrite("cluster_separation", &MlpSpec::cluster_separation)
      .def_readwrite("cluster_spread", &MlpSpec::cluster_spread)
      .def_readwrite("data_seed", &MlpSpec::data_seed);

  py::class_<Problem>(m, "Problem")
      .def_static("noisy_quadratic",
                  py::overload_cast<int, double>(&Problem::noisy_quadratic),
                  py::arg("dimension"), py::arg("sigma2"))
      .def_static("noisy_rosenbrock", &Problem::noisy_rosenbrock,
                  py::arg("dimension"), py::arg("sigma2"))
      .def_static("finite_sum_mlp", &Problem::finite_sum_mlp, py::arg("spec"))
      .def_property_readonly("kind", &Problem::kind)
      .def_property_readonly("dimension", &Problem::dimension)
      .def_property_readonly("noise_variance", &Problem::noise_variance)
      .def_property_readonly("sample_count", &Problem::sample_count)
      .def("loss", &Problem::loss)
      .def("full_gradient", &Problem::full_gradient)
      .def("default_initial_point", &Problem::default_initial_point);

  m.def(
      "minibatch_gradient",
      [](const Problem& p, const ParamVector& theta, int batch,
         std::uint64_t seed, std::uint64_t step, bool with_replacement) {
        return minibatch_gradient(p, theta, batch, GradKey{seed, step},
                                  with_replacement
                                      ? SamplingMode::WithReplacement
                                      : SamplingMode::WithoutReplacement);
      },
      py::arg("problem"), py::arg("theta"), py::arg("batch"), py::arg("seed"),
      py::arg("step") = 0, py::arg("with_replacement") = true);

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("alpha", &HyperParams::alpha)
      .def_readwrite("beta", &HyperParams::beta)
      .def_readwrite("gamma", &HyperParams::gamma)
      .def_readwrite("eta", &HyperParams::eta)
      .def_readwrite("zeta", &HyperParams::zeta)
      .def_readwrite("epsilon_num", &HyperParams::epsilon_num);

  py::enum_<RuleVariant>(m, "RuleVariant")
      .value("Sgd", RuleVariant::Sgd)
      .value("Momentum", RuleVariant::Momentum)
      .value("AmsGrad", RuleVariant::AmsGrad)
      .value("AmsBound", RuleVariant::AmsBound)
      .value("Adam", RuleVariant::Adam)
      .value("AdaBelief", RuleVariant::AdaBelief);

  py::class_<PreconditionerRule>(m, "PreconditionerRule")
      .def(py::init<>())
      .def_readwrite("variant", &PreconditionerRule::variant)
      .def_readwrite("bound_scale", &PreconditionerRule::bound_scale);

  m.def("clamp", &clamp, py::arg("x"), py::arg("lower"), py::arg("upper"));

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("theta", &StepRecord::theta)
      .def_readonly("grad", &StepRecord::grad)
      .def_readonly("m_prev", &StepRecord::m_prev)
      .def_readonly("m", &StepRecord::m)
      .def_readonly("m_hat", &StepRecord::m_hat)
      .def_readonly("h", &StepRecord::h)
      .def_readonly("d", &StepRecord::d)
      .def_readonly("loss", &StepRecord::loss);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("steps", &Trajectory::steps)
      .def_readonly("losses", &Trajectory::losses)
      .def_readonly("final_theta", &Trajectory::final_theta)
      .def_readonly("batch", &Trajectory::batch)
      .def_readonly("seed", &Trajectory::seed)
      .def_property_readonly("executed_steps", &Trajectory::executed_steps)
      .def_property_readonly("diverged",
                             [](const Trajectory& t) { return bool(t.fault); });

  m.def(
      "run",
      [](const Problem& problem, const HyperParams& hyper,
         const PreconditionerRule& rule, int batch, std::optional<double> tau,
         std::optional<long> max_steps, std::uint64_t seed, bool full_records,
         std::optional<ParamVector> theta0, long loss_every) {
        RunOptions opts;
        opts.batch = batch;
        opts.stop = StopCondition{tau, max_steps};
        opts.seed = seed;
        opts.record = full_records ? RecordMode::Full : RecordMode::Scalars;
        opts.theta0 = std::move(theta0);
        opts.loss_every = loss_every;
        return run(problem, hyper, rule, opts);
      },
      py::arg("problem"), py::arg("hyper"), py::arg("rule"),
      py::arg("batch") = 1, py::arg("tau") = std::nullopt,
      py::arg("max_steps") = std::nullopt, py::arg("seed") = 0,
      py::arg("full_records") = true, py::arg("theta0") = std::nullopt,
      py::arg("loss_every") = 1);

  py::class_<OracleStats>(m, "OracleStats")
      .def_readonly("sigma2_hat", &OracleStats::sigma2_hat)
      .def_readonly("p2_hat", &OracleStats::p2_hat)
      .def_readonly("dist_hat", &OracleStats::dist_hat)
      .def_readonly("h0_star", &OracleStats::h0_star)
      .def_readonly("h_cap", &OracleStats::h_cap)
      .def_readonly("c1_hat", &OracleStats::c1_hat)
      .def_readonly("c2_hat", &OracleStats::c2_hat)
      .def_readonly("x_hat", &OracleStats::x_hat)
      .def_readonly("x_hat_nonpositive", &OracleStats::x_hat_nonpositive)
      .def_readonly("reference_missing", &OracleStats::reference_missing);

  m.def("estimate_oracle_stats", &estimate_oracle_stats, py::arg("problem"),
        py::arg("trajectory"), py::arg("samples"),
        py::arg("reference") = std::nullopt);

  py::class_<IdentityReport>(m, "IdentityReport")
      .def_readonly("residuals", &IdentityReport::residuals)
      .def_readonly("scaled_residuals", &IdentityReport::scaled_residuals)
      .def_readonly("max_scaled", &IdentityReport::max_scaled)
      .def_readonly("argmax_step", &IdentityReport::argmax_step);

  m.def("pathwise_identity_residuals", &pathwise_identity_residuals,
        py::arg("trajectory"), py::arg("theta_ref"));

  py::class_<DecompositionReport>(m, "DecompositionReport")
      .def_readonly("horizon", &DecompositionReport::horizon)
      .def_readonly("v_hat", &DecompositionReport::v_hat)
      .def_readonly("gamma_term", &DecompositionReport::gamma_term)
      .def_readonly("a_term", &DecompositionReport::a_term)
      .def_readonly("b_term", &DecompositionReport::b_term)
      .def_readonly("residual", &DecompositionReport::residual)
      .def("scaled_residual", &DecompositionReport::scaled_residual);

  m.def("decompose_v", &decompose_v, py::arg("problem"), py::arg("trajectory"),
        py::arg("theta_ref"), py::arg("horizon"),
        py::arg("use_recorded_gradients") = false);

  py::class_<MomentumBoundReport>(m, "MomentumBoundReport")
      .def_readonly("mean_m2", &MomentumBoundReport::mean_m2)
      .def_readonly("m_bound", &MomentumBoundReport::m_bound)
      .def_readonly("mean_d2h", &MomentumBoundReport::mean_d2h)
      .def_readonly("d_bound", &MomentumBoundReport::d_bound)
      .def_readonly("pathwise_violations",
                    &MomentumBoundReport::pathwise_violations)
      .def("pathwise_ok", &MomentumBoundReport::pathwise_ok);

  m.def("momentum_bound_check", &momentum_bound_check, py::arg("trajectory"),
        py::arg("stats"), py::arg("batch"));

  py::class_<AssumptionAudit>(m, "AssumptionAudit")
      .def_readonly("a1_pairs", &AssumptionAudit::a1_pairs)
      .def_readonly("a1_violations", &AssumptionAudit::a1_violations)
      .def("a1_violation_rate", &AssumptionAudit::a1_violation_rate)
      .def_readonly("p2_hat", &AssumptionAudit::p2_hat)
      .def_readonly("dist_hat", &AssumptionAudit::dist_hat)
      .def_readonly("c1_hat", &AssumptionAudit::c1_hat)
      .def_readonly("c2_hat", &AssumptionAudit::c2_hat)
      .def_readonly("x_hat", &AssumptionAudit::x_hat)
      .def_readonly("below_gate_frequency",
                    &AssumptionAudit::below_gate_frequency);

  m.def("assumption_audit", &assumption_audit, py::arg("problem"),
        py::arg("trajectory"), py::arg("stats"), py::arg("eps") = 0.1,
        py::arg("delta") = 0.01);

  // bound curves
  py::class_<bounds::LowerBoundInputs>(m, "LowerBoundInputs")
      .def(py::init<>())
      .def_readwrite("alpha", &bounds::LowerBoundInputs::alpha)
      .def_readwrite("beta", &bounds::LowerBoundInputs::beta)
      .def_readwrite("gamma", &bounds::LowerBoundInputs::gamma)
      .def_readwrite("dimension", &bounds::LowerBoundInputs::dimension)
      .def_readwrite("dist", &bounds::LowerBoundInputs::dist)
      .def_readwrite("h_cap", &bounds::LowerBoundInputs::h_cap)
      .def_readwrite("sigma2", &bounds::LowerBoundInputs::sigma2)
      .def_readwrite("p2", &bounds::LowerBoundInputs::p2)
      .def_readwrite("h0_star", &bounds::LowerBoundInputs::h0_star);

  py::class_<bounds::UpperBoundInputs>(m, "UpperBoundInputs")
      .def(py::init<>())
      .def_readwrite("alpha", &bounds::UpperBoundInputs::alpha)
      .def_readwrite("beta", &bounds::UpperBoundInputs::beta)
      .def_readwrite("gamma", &bounds::UpperBoundInputs::gamma)
      .def_readwrite("x_star", &bounds::UpperBoundInputs::x_star)
      .def_readwrite("sigma2", &bounds::UpperBoundInputs::sigma2)
      .def_readwrite("p2", &bounds::UpperBoundInputs::p2)
      .def_readwrite("c1", &bounds::UpperBoundInputs::c1)
      .def_readwrite("c2", &bounds::UpperBoundInputs::c2);

  py::class_<bounds::LowerConstants>(m, "LowerConstants")
      .def_readonly("a", &bounds::LowerConstants::a)
      .def_readonly("b", &bounds::LowerConstants::b)
      .def_readonly("c", &bounds::LowerConstants::c)
      .def_readonly("d", &bounds::LowerConstants::d);

  py::class_<bounds::UpperConstants>(m, "UpperConstants")
      .def_readonly("e", &bounds::UpperConstants::e)
      .def_readonly("f", &bounds::UpperConstants::f)
      .def_readonly("g", &bounds::UpperConstants::g)
      .def_readonly("vacuous", &bounds::UpperConstants::vacuous);

  m.def("lower_constants", &bounds::lower_constants);
  m.def("upper_constants", &bounds::upper_constants);

  py::class_<bounds::BoundConstants>(m, "BoundConstants")
      .def(py::init<>())
      .def_readwrite("a", &bounds::BoundConstants::a)
      .def_readwrite("b", &bounds::BoundConstants::b)
      .def_readwrite("c", &bounds::BoundConstants::c)
      .def_readwrite("d", &bounds::BoundConstants::d)
      .def_readwrite("e", &bounds::BoundConstants::e)
      .def_readwrite("f", &bounds::BoundConstants::f)
      .def_readwrite("g", &bounds::BoundConstants::g)
      .def_readwrite("eps", &bounds::BoundConstants::eps)
      .def_readwrite("delta", &bounds::BoundConstants::delta)
      .def("lower_domain_threshold",
           &bounds::BoundConstants::lower_domain_threshold)
      .def("lower_asymptote", &bounds::BoundConstants::lower_asymptote)
      .def("upper_asymptote", &bounds::BoundConstants::upper_asymptote)
      .def("upper_vacuous", &bounds::BoundConstants::upper_vacuous);

  m.def("make_constants", &bounds::make_constants, py::arg("lower"),
        py::arg("upper"), py::arg("eps"), py::arg("delta"));
  m.def("lower_steps", &bounds::lower_steps, py::arg("batch"),
        py::arg("constants"));
  m.def("upper_steps", &bounds::upper_steps, py::arg("batch"),
        py::arg("constants"));

  py::class_<bounds::CriticalBatch>(m, "CriticalBatch")
      .def_readonly("batch", &bounds::CriticalBatch::batch)
      .def_readonly("min_sfo", &bounds::CriticalBatch::min_sfo)
      .def_readonly("degenerate", &bounds::CriticalBatch::degenerate)
      .def_readonly("informative", &bounds::CriticalBatch::informative);

  m.def("critical_batch_lower", &bounds::critical_batch_lower);
  m.def("critical_batch_upper", &bounds::critical_batch_upper);

  py::class_<bounds::FitResiduals>(m, "FitResiduals")
      .def_readonly("r1", &bounds::FitResiduals::r1)
      .def_readonly("r2", &bounds::FitResiduals::r2);

  m.def("fit_condition_residuals", &bounds::fit_condition_residuals);

  // sweep protocol
  py::enum_<RunStatus>(m, "RunStatus")
      .value("Ok", RunStatus::Ok)
      .value("Timeout", RunStatus::Timeout)
      .value("Diverged", RunStatus::Diverged);

  py::class_<SweepRecord>(m, "SweepRecord")
      .def(py::init<>())
      .def_readwrite("batch", &SweepRecord::batch)
      .def_readwrite("seed", &SweepRecord::seed)
      .def_readwrite("steps", &SweepRecord::steps)
      .def_readwrite("sfo", &SweepRecord::sfo)
      .def_readwrite("terminal_loss", &SweepRecord::terminal_loss)
      .def_readwrite("wall_time_s", &SweepRecord::wall_time_s)
      .def_readwrite("status", &SweepRecord::status);

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("batches", &SweepConfig::batches)
      .def_readwrite("tau", &SweepConfig::tau)
      .def_readwrite("budget_epochs", &SweepConfig::budget_epochs)
      .def_readwrite("steps_per_epoch", &SweepConfig::steps_per_epoch)
      .def_readwrite("seeds_per_batch", &SweepConfig::seeds_per_batch)
      .def_readwrite("master_seed", &SweepConfig::master_seed)
      .def_readwrite("workers", &SweepConfig::workers)
      .def_readwrite("theta0", &SweepConfig::theta0);

  m.def("sfo_sweep", &sfo_sweep, py::arg("problem"), py::arg("rule"),
        py::arg("hyper"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "steps_to_threshold",
      [](const Problem& problem, const PreconditionerRule& rule,
         const HyperParams& hyper, long long batch, double tau,
         long budget_epochs, long steps_per_epoch, std::uint64_t seed,
         std::optional<ParamVector> theta0) {
        return steps_to_threshold(problem, rule, hyper, batch, tau,
                                  budget_epochs, steps_per_epoch, seed,
                                  SamplingMode::WithReplacement, theta0);
      },
      py::arg("problem"), py::arg("rule"), py::arg("hyper"), py::arg("batch"),
      py::arg("tau"), py::arg("budget_epochs") = 200,
      py::arg("steps_per_epoch") = 1000, py::arg("seed") = 1,
      py::arg("theta0") = std::nullopt);

  py::class_<BatchSummary>(m, "BatchSummary")
      .def_readonly("batch", &BatchSummary::batch)
      .def_readonly("k_median", &BatchSummary::k_median)
      .def_readonly("sfo_median", &BatchSummary::sfo_median)
      .def_readonly("n_ok", &BatchSummary::n_ok);

  m.def("summarize", &summarize);

  py::class_<CriticalBatchEstimate>(m, "CriticalBatchEstimate")
      .def_readonly("batch", &CriticalBatchEstimate::batch)
      .def_readonly("min_sfo", &CriticalBatchEstimate::min_sfo);

  m.def("estimate_critical_batch", &estimate_critical_batch);
  m.def("detect_perfect_scaling", &detect_perfect_scaling, py::arg("records"),
        py::arg("tol"));

  py::class_<RationalFit>(m, "RationalFit")
      .def_readonly("a_hat", &RationalFit::a_hat)
      .def_readonly("b_hat", &RationalFit::b_hat)
      .def_readonly("c_hat", &RationalFit::c_hat)
      .def_readonly("asymptote", &RationalFit::asymptote)
      .def_readonly("critical_batch", &RationalFit::critical_batch)
      .def_readonly("residual_norm", &RationalFit::residual_norm);

  m.def("fit_rational", &fit_rational);

  py::register_exception<InvalidBatchError>(m, "InvalidBatchError");
  py::register_exception<NoDataError>(m, "NoDataError");
  py::register_exception<FitError>(m, "FitError");
  py::register_exception<bounds::DomainError>(m, "BoundDomainError");
}
