#pragma once

#include <cassert>
#include <cmath>

namespace d2dtdd::detail {

/// Root of a continuous function on [lo, hi] by bisection.
/// Requires f(lo) and f(hi) of opposite (or zero) sign; stops when the
/// bracket is narrower than `tol` and returns its midpoint.
template <typename F>
double bisect_root(F&& f, double lo, double hi, double tol) {
  assert(lo <= hi);
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  assert((flo < 0.0) != (fhi < 0.0));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Minimizer of a convex differentiable function on [lo, hi], located by
/// bisection on the (nondecreasing) derivative.
template <typename Deriv>
double minimize_convex_by_derivative(Deriv&& deriv, double lo, double hi, double tol) {
  assert(lo <= hi);
  if (lo == hi) return lo;
  if (deriv(lo) >= 0.0) return lo;  // increasing from the left edge
  if (deriv(hi) <= 0.0) return hi;  // still decreasing at the right edge
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = deriv(mid);
    if (d == 0.0) return mid;
    if (d < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace d2dtdd::detail
