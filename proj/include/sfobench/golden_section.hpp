#pragma once

#include <cmath>
#include <utility>

namespace sfo {

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Golden-section search for the minimum of a unimodal f on [lo, hi].
// Interval shrinks by the golden ratio each iteration; stops when the
// bracket width falls below tol_rel * |midpoint| (plus a tiny absolute
// floor for brackets straddling zero).
template <typename F>
GoldenResult golden_section_minimize(F&& f, double lo, double hi,
                                     double tol_rel = 1e-10,
                                     int max_iter = 200) {
  constexpr double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int it = 0;
  while (it < max_iter) {
    const double mid = 0.5 * (std::abs(a) + std::abs(b));
    if (std::abs(b - a) <= tol_rel * mid + 1e-300) break;
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    ++it;
  }
  GoldenResult r;
  if (f1 < f2) {
    r.x = x1;
    r.fx = f1;
  } else {
    r.x = x2;
    r.fx = f2;
  }
  r.iterations = it;
  return r;
}

}  // namespace sfo
