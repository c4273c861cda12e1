#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eecdma/error.hpp"

namespace eecdma::roots {

/// Doubles `hi` (keeping `lo`) until f changes sign between the two ends.
/// Throws NumericalError after `max_doublings` attempts.
template <class F>
double expand_upper(F&& f, double lo, double hi, int max_doublings = 2000) {
  const bool lo_negative = f(lo) < 0.0;
  for (int i = 0; i < max_doublings; ++i) {
    const double value = f(hi);
    if ((value < 0.0) != lo_negative || value == 0.0) return hi;
    hi = lo + 2.0 * (hi - lo);
    if (!std::isfinite(hi)) break;
  }
  throw NumericalError("no sign change found while expanding bracket");
}

/// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs.
/// Stops when the bracket width falls below rel_tol * max(|lo|, |hi|) or
/// stops shrinking in floating point.
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-12, int max_iters = 2000) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    throw NumericalError("bisect: f has the same sign at both bracket ends");
  }
  for (int i = 0; i < max_iters; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return lo + 0.5 * (hi - lo);
}

/// Root of f on (lo, +inf): expands the upper end from `hi0` and bisects.
template <class F>
double solve_increasing_bracket(F&& f, double lo, double hi0, double rel_tol = 1e-12) {
  const double hi = expand_upper(f, lo, hi0);
  return bisect(f, lo, hi, rel_tol);
}

}  // namespace eecdma::roots
