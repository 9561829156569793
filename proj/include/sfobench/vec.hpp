#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace sfo {

// d-dimensional parameter/gradient/momentum point.
using ParamVector = std::vector<double>;

inline double dot(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const ParamVector& a) { return dot(a, a); }

inline double norm(const ParamVector& a) { return std::sqrt(norm2(a)); }

// x^T diag(h) x
inline double weighted_norm2(const ParamVector& x, const ParamVector& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += h[i] * x[i] * x[i];
  return s;
}

inline bool all_finite(const ParamVector& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace sfo
