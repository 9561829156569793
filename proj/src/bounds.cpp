#include "sfobench/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sfobench/csv.hpp"

namespace sfo::bounds {

LowerConstants lower_constants(const LowerBoundInputs& in) {
  if (!(in.alpha > 0)) throw InvalidConstantsError("alpha must be > 0");
  if (!(in.beta >= 0 && in.beta < 1))
    throw InvalidConstantsError("beta must be in [0,1)");
  if (!(in.gamma >= 0 && in.gamma < 1))
    throw InvalidConstantsError("gamma must be in [0,1)");
  if (!(in.h0_star > 0))
    throw InvalidConstantsError("h0_star must be > 0 (division fault)");
  const double beta_t = 1.0 - in.beta;
  const double gamma_t = 1.0 - in.gamma;
  LowerConstants k;
  k.a = in.dimension * in.dist * in.h_cap / (2.0 * in.alpha * beta_t);
  k.b = in.sigma2 * in.alpha / (2.0 * beta_t * gamma_t * gamma_t * in.h0_star);
  k.c = in.p2 * in.alpha / (2.0 * beta_t * gamma_t * gamma_t * in.h0_star);
  k.d = std::sqrt(in.dimension * in.dist * (in.sigma2 + in.p2)) * in.beta /
        beta_t;
  return k;
}

UpperConstants upper_constants(const UpperBoundInputs& in) {
  if (!(in.alpha > 0)) throw InvalidConstantsError("alpha must be > 0");
  if (!(in.beta >= 0 && in.beta < 1))
    throw InvalidConstantsError("beta must be in [0,1)");
  if (!(in.gamma >= 0 && in.gamma < 1))
    throw InvalidConstantsError("gamma must be in [0,1)");
  if (!(in.c1 >= 0 && in.c1 <= 1))
    throw InvalidConstantsError("c1 must be in [0,1]");
  if (!(in.c2 >= 0)) throw InvalidConstantsError("c2 must be >= 0");
  const double beta_t = 1.0 - in.beta;
  const double gamma_t = 1.0 - in.gamma;
  UpperConstants k;
  k.e = in.x_star / (2.0 * in.alpha * beta_t);
  k.f = in.sigma2 * (in.c1 * in.alpha * gamma_t - 2.0 * in.c2 * in.beta) /
        (2.0 * beta_t);
  k.g = in.c2 * in.beta * in.p2 / beta_t;
  k.vacuous = !(k.f > 0.0);
  return k;
}

BoundConstants make_constants(const LowerConstants& lo, const UpperConstants& up,
                              double eps, double delta) {
  if (!(eps > 0)) throw InvalidConstantsError("eps must be > 0");
  if (!(delta > 0 && delta <= 1))
    throw InvalidConstantsError("delta must be in (0,1]");
  BoundConstants k;
  k.a = lo.a;
  k.b = lo.b;
  k.c = lo.c;
  k.d = lo.d;
  k.e = up.e;
  k.f = up.f;
  k.g = up.g;
  k.eps = eps;
  k.delta = delta;
  return k;
}

double lower_steps(double batch, const BoundConstants& k) {
  const double margin = k.lower_margin();
  if (!(margin > 0))
    throw DomainError("lower bound curve undefined: eps^2 <= C + D",
                      std::numeric_limits<double>::infinity());
  const double threshold = k.b / margin;
  if (!(batch > threshold))
    throw DomainError("batch " + format_g17(batch) +
                          " outside lower-curve domain b > " +
                          format_g17(threshold),
                      threshold);
  return k.a * batch / (margin * batch - k.b);
}

std::optional<double> upper_steps(double batch, const BoundConstants& k) {
  if (k.upper_vacuous()) return std::nullopt;  // bound-not-informative
  const double gain = k.upper_gain();
  const double threshold = k.f / gain;
  if (!(batch > threshold))
    throw DomainError("batch " + format_g17(batch) +
                          " outside upper-curve domain b > " +
                          format_g17(threshold),
                      threshold);
  return k.e * batch / (gain * batch - k.f);
}

CriticalBatch critical_batch_lower(const BoundConstants& k) {
  const double margin = k.lower_margin();
  if (!(margin > 0))
    throw DomainError("lower bound curve undefined: eps^2 <= C + D",
                      std::numeric_limits<double>::infinity());
  CriticalBatch cb;
  if (k.b == 0.0) {
    // K(b) b = (A / margin) b is monotone increasing: no interior minimizer.
    cb.degenerate = true;
    cb.batch = 0.0;
    cb.min_sfo = 0.0;
    return cb;
  }
  cb.batch = 2.0 * k.b / margin;
  cb.min_sfo = 4.0 * k.a * k.b / (margin * margin);
  return cb;
}

CriticalBatch critical_batch_upper(const BoundConstants& k) {
  CriticalBatch cb;
  if (k.upper_vacuous()) {
    cb.informative = false;
    return cb;
  }
  const double gain = k.upper_gain();
  cb.batch = 2.0 * k.f / gain;
  cb.min_sfo = 4.0 * k.e * k.f / (gain * gain);
  return cb;
}

FitResiduals fit_condition_residuals(const BoundConstants& k) {
  const double ab = k.a * k.b;
  const double ef = k.e * k.f;
  if (ab < 0 || ef < 0)
    throw InvalidConstantsError("negative radicand in fit conditions");
  const double eps2 = k.eps * k.eps;
  FitResiduals r;
  r.r1 = (k.c + k.d) * k.f + k.b * k.g - (k.f - k.delta * k.b) * eps2;
  r.r2 = (k.c + k.d) * std::sqrt(ef) + k.g * std::sqrt(ab) -
         (std::sqrt(ef) - k.delta * std::sqrt(ab)) * eps2;
  return r;
}

std::vector<CurvePoint> curve_table(const BoundConstants& k,
                                    const std::vector<double>& batch_grid) {
  std::vector<CurvePoint> table;
  table.reserve(batch_grid.size());
  const bool lower_ok = k.lower_valid();
  const double lower_thr = lower_ok ? k.lower_domain_threshold() : 0.0;
  const bool upper_ok = !k.upper_vacuous();
  const double upper_thr = upper_ok ? k.upper_domain_threshold() : 0.0;
  for (double b : batch_grid) {
    CurvePoint p;
    p.batch = b;
    if (lower_ok && b > lower_thr) {
      p.k_lower = lower_steps(b, k);
      p.sfo_lower = *p.k_lower * b;
    }
    if (upper_ok && b > upper_thr) {
      p.k_upper = upper_steps(b, k);
      p.sfo_upper = *p.k_upper * b;
    }
    table.push_back(p);
  }
  return table;
}

void write_curve_csv(const std::vector<CurvePoint>& table, std::ostream& os) {
  CsvWriter w(os, {"b", "k_lower", "k_upper", "sfo_lower", "sfo_upper"});
  for (const CurvePoint& p : table) {
    w.begin_row();
    w.cell(p.batch);
    if (p.k_lower) w.cell(*p.k_lower); else w.cell_empty();
    if (p.k_upper) w.cell(*p.k_upper); else w.cell_empty();
    if (p.sfo_lower) w.cell(*p.sfo_lower); else w.cell_empty();
    if (p.sfo_upper) w.cell(*p.sfo_upper); else w.cell_empty();
    w.end_row();
  }
}

double worst_scaled_second_difference(const std::vector<double>& grid,
                                      const std::vector<double>& values) {
  if (grid.size() != values.size() || grid.size() < 3)
    throw std::invalid_argument("need matching grids with >= 3 points");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double dd = values[i + 1] - 2.0 * values[i] + values[i - 1];
    const double scale = std::max({std::abs(values[i - 1]),
                                   std::abs(values[i]),
                                   std::abs(values[i + 1]), 1e-300});
    worst = std::min(worst, dd / scale);
  }
  return worst;
}

}  // namespace sfo::bounds
