#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfo::bounds {

// Out-of-domain evaluation of a bound curve; carries the domain threshold.
struct DomainError : std::runtime_error {
  DomainError(const std::string& what, double threshold)
      : std::runtime_error(what), threshold(threshold) {}
  double threshold;
};

struct InvalidConstantsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs for the lower-side constants:
//   A = d Dist H / (2 alpha (1-beta))
//   B = sigma^2 alpha / (2 (1-beta) (1-gamma)^2 h0*)
//   C = P^2 alpha / (2 (1-beta) (1-gamma)^2 h0*)
//   D = sqrt(d Dist (sigma^2 + P^2)) beta / (1-beta)
struct LowerBoundInputs {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double dimension = 0.0;
  double dist = 0.0;     // Dist(theta)
  double h_cap = 0.0;    // H
  double sigma2 = 0.0;
  double p2 = 0.0;       // P^2
  double h0_star = 0.0;  // min initial preconditioner entry
};

// Inputs for the upper-side constants:
//   E = X(theta*) / (2 alpha (1-beta))
//   F = sigma^2 (c1 alpha (1-gamma) - 2 c2 beta) / (2 (1-beta))
//   G = c2 beta P^2 / (1-beta)
struct UpperBoundInputs {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double x_star = 0.0;  // X(theta*)
  double sigma2 = 0.0;
  double p2 = 0.0;
  double c1 = 1.0;  // in [0,1]
  double c2 = 0.0;  // >= 0
};

struct LowerConstants {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

struct UpperConstants {
  double e = 0.0, f = 0.0, g = 0.0;
  bool vacuous = false;  // F <= 0: the upper curve carries no information
};

LowerConstants lower_constants(const LowerBoundInputs& in);
UpperConstants upper_constants(const UpperBoundInputs& in);

struct BoundConstants {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // lower side
  double e = 0.0, f = 0.0, g = 0.0;           // upper side
  double eps = 0.1;                            // precision, > 0
  double delta = 0.01;                         // precision, (0,1]

  double lower_margin() const { return eps * eps - (c + d); }  // eps^2-(C+D)
  double upper_gain() const { return delta * eps * eps + g; }  // d eps^2+G
  bool lower_valid() const { return lower_margin() > 0.0; }
  bool upper_vacuous() const { return !(f > 0.0); }
  double lower_domain_threshold() const { return b / lower_margin(); }
  double upper_domain_threshold() const { return f / upper_gain(); }
  double lower_asymptote() const { return a / lower_margin(); }
  double upper_asymptote() const { return e / upper_gain(); }
};

BoundConstants make_constants(const LowerConstants& lo, const UpperConstants& up,
                              double eps, double delta);

// K_lower(b) = A b / ((eps^2 - (C+D)) b - B), for b above the domain
// threshold. Throws DomainError otherwise.
double lower_steps(double batch, const BoundConstants& k);

// K_upper(b) = E b / ((delta eps^2 + G) b - F). Returns nullopt when the
// curve is vacuous (F <= 0); throws DomainError below the threshold.
std::optional<double> upper_steps(double batch, const BoundConstants& k);

struct CriticalBatch {
  double batch = 0.0;
  double min_sfo = 0.0;
  bool degenerate = false;   // B = 0: K(b) b is monotone, no interior minimum
  bool informative = true;   // false for the vacuous upper curve
};

// b_* = 2B / (eps^2 - (C+D)), min = 4AB / (eps^2 - (C+D))^2.
CriticalBatch critical_batch_lower(const BoundConstants& k);
// b^* = 2F / (delta eps^2 + G), min = 4EF / (delta eps^2 + G)^2.
CriticalBatch critical_batch_upper(const BoundConstants& k);

// Residuals of the fit conditions tying the two curves together:
//   r1 = (C+D) F + B G - (F - delta B) eps^2
//   r2 = (C+D) sqrt(EF) + G sqrt(AB) - (sqrt(EF) - delta sqrt(AB)) eps^2
// Near-zero residuals certify b_* ~ b^* with matching minima.
struct FitResiduals {
  double r1 = 0.0;
  double r2 = 0.0;
};

FitResiduals fit_condition_residuals(const BoundConstants& k);

struct CurvePoint {
  double batch = 0.0;
  std::optional<double> k_lower, k_upper, sfo_lower, sfo_upper;
};

// Samples both curves over the grid; out-of-domain or vacuous entries are
// absent. An empty grid yields an empty table.
std::vector<CurvePoint> curve_table(const BoundConstants& k,
                                    const std::vector<double>& batch_grid);

void write_curve_csv(const std::vector<CurvePoint>& table, std::ostream& os);

// Numeric verification hooks. Worst (most negative) scaled second difference
// over a uniform grid; >= -tol certifies convexity numerically.
double worst_scaled_second_difference(const std::vector<double>& grid,
                                      const std::vector<double>& values);

}  // namespace sfo::bounds
