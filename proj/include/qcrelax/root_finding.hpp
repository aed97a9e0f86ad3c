#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "qcrelax/errors.hpp"

namespace qcrelax {

/// Residual sample for the hybrid solver. `scale` normalises the stopping
/// test: iteration stops once |value| <= tol * scale.
struct ResidualSample {
  double value;
  double derivative;
  double scale = 1.0;
};

struct RootResult {
  double root;
  double residual;  // value / scale at the root
  int iterations;
  double lo;
  double hi;
};

/// Safeguarded Newton iteration inside a sign-changing bracket [lo, hi].
/// Falls back to bisection whenever the Newton step leaves the bracket or
/// fails to halve the bracket. The bracket is shrunk on every step.
template <class Fn>
RootResult solve_bracketed(Fn&& fn, double lo, double hi, double tol, int max_iter = 200) {
  ResidualSample flo = fn(lo);
  ResidualSample fhi = fn(hi);
  if (flo.value == 0.0) return {lo, 0.0, 0, lo, hi};
  if (fhi.value == 0.0) return {hi, 0.0, 0, lo, hi};
  if ((flo.value > 0.0) == (fhi.value > 0.0))
    throw ConvergenceFailure("solve_bracketed: no sign change on [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
  const bool lo_positive = flo.value > 0.0;

  double x = 0.5 * (lo + hi);
  double step_old = hi - lo;
  double step = step_old;
  for (int it = 1; it <= max_iter; ++it) {
    const ResidualSample s = fn(x);
    const double rel = s.value / s.scale;
    if (std::abs(rel) <= tol) return {x, rel, it, lo, hi};
    if ((s.value > 0.0) == lo_positive)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      return {x, rel, it, lo, hi};

    const double newton = x - s.value / s.derivative;
    // Bisect when Newton leaves the bracket or is not converging fast enough.
    if (!std::isfinite(newton) || newton <= lo || newton >= hi ||
        std::abs(2.0 * s.value) > std::abs(step_old * s.derivative)) {
      step_old = step;
      step = 0.5 * (hi - lo);
      x = lo + step;
    } else {
      step_old = step;
      step = x - newton;
      x = newton;
    }
  }
  throw ConvergenceFailure("solve_bracketed: iteration cap of " + std::to_string(max_iter) +
                           " reached");
}

}  // namespace qcrelax
