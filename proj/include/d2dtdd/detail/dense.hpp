#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace d2dtdd::detail {

/// Solves A x = b for a small dense row-major system by Gaussian elimination
/// with partial pivoting. Returns false on a (near-)singular pivot.
inline bool solve_linear(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
  assert(static_cast<int>(a.size()) == n * n && static_cast<int>(b.size()) == n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0 || !std::isfinite(best)) return false;
    if (pivot != col) {
      for (int c = col; c < n; ++c) std::swap(a[static_cast<std::size_t>(pivot) * n + c], a[static_cast<std::size_t>(col) * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * x[c];
    x[r] = s / a[static_cast<std::size_t>(r) * n + r];
    if (!std::isfinite(x[r])) return false;
  }
  return true;
}

namespace impl {

/// Perron root of a nonnegative irreducible matrix by power iteration.
///
/// Iterates x <- (A + I) x, which keeps x positive and is aperiodic whenever A
/// is irreducible; for any positive x the Collatz-Wielandt ratios of both the
/// shifted single step and the plain two-step A(Ax) bracket rho(A). The
/// two-step bracket closes immediately on 2-periodic structures (e.g. 2x2
/// zero-diagonal matrices) where the shifted gap is tiny.
inline double nonneg_spectral_radius_irreducible(const std::vector<double>& a, int n, double tol = 1e-12,
                                                 int max_iters = 10000) {
  assert(static_cast<int>(a.size()) == n * n);
  if (n == 0) return 0.0;
  std::vector<double> x(n, 1.0 / n), ax(n), aax(n);
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = a.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) s += row[j] * x[j];
      ax[i] = s;
      norm += s + x[i];
    }
    // single-step bracket from the shifted iteration
    double lo1 = std::numeric_limits<double>::infinity(), hi1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ratio = ax[i] / x[i];
      lo1 = std::min(lo1, ratio);
      hi1 = std::max(hi1, ratio);
    }
    // two-step bracket: rho(A)^2 lies between the ratios of A(Ax) over x
    double lo2 = std::numeric_limits<double>::infinity(), hi2 = 0.0;
    bool two_step_ok = true;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = a.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) s += row[j] * ax[j];
      aax[i] = s;
      const double ratio = aax[i] / x[i];
      if (!std::isfinite(ratio)) two_step_ok = false;
      lo2 = std::min(lo2, ratio);
      hi2 = std::max(hi2, ratio);
    }
    lo = std::max(lo, lo1);
    hi = std::min(hi, hi1);
    if (two_step_ok && lo2 >= 0.0) {
      lo = std::max(lo, std::sqrt(lo2));
      hi = std::min(hi, std::sqrt(hi2));
    }
    if (hi - lo <= tol * std::max(1.0, hi)) break;
    if (hi == 0.0) break;  // A x == 0: nilpotent direction, rho below tol
    const double inv = static_cast<double>(n) / norm;
    for (int i = 0; i < n; ++i) x[i] = (ax[i] + x[i]) * inv;
  }
  if (!std::isfinite(hi)) return lo;
  return 0.5 * (lo + hi);
}

}  // namespace impl

/// Perron root of a nonnegative square matrix. The Collatz-Wielandt bracket
/// only closes on irreducible matrices, so the matrix is first split into the
/// strongly connected components of its support graph; the spectral radius is
/// the largest component value (the reducible form is block triangular).
inline double nonneg_spectral_radius(const std::vector<double>& a, int n, double tol = 1e-12, int max_iters = 10000) {
  assert(static_cast<int>(a.size()) == n * n);
  if (n == 0) return 0.0;
  if (n > 64) return impl::nonneg_spectral_radius_irreducible(a, n, tol, max_iters);

  std::vector<std::uint64_t> reach(n, 0);
  for (int i = 0; i < n; ++i) {
    reach[i] |= std::uint64_t{1} << i;
    for (int j = 0; j < n; ++j)
      if (a[static_cast<std::size_t>(i) * n + j] != 0.0) reach[i] |= std::uint64_t{1} << j;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if ((reach[i] >> k) & 1u) reach[i] |= reach[k];

  double rho = 0.0;
  std::uint64_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    if ((assigned >> i) & 1u) continue;
    std::vector<int> comp;
    for (int j = i; j < n; ++j)
      if (((reach[i] >> j) & 1u) && ((reach[j] >> i) & 1u) && !((assigned >> j) & 1u)) {
        comp.push_back(j);
        assigned |= std::uint64_t{1} << j;
      }
    const int m = static_cast<int>(comp.size());
    if (m == 1) {
      rho = std::max(rho, a[static_cast<std::size_t>(comp[0]) * n + comp[0]]);
      continue;
    }
    std::vector<double> block(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        block[static_cast<std::size_t>(r) * m + c] = a[static_cast<std::size_t>(comp[r]) * n + comp[c]];
    rho = std::max(rho, impl::nonneg_spectral_radius_irreducible(block, m, tol, max_iters));
  }
  return rho;
}

}  // namespace d2dtdd::detail
