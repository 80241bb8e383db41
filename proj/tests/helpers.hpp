#pragma once

// Independent numeric oracles for the test suite.  These deliberately avoid
// the library's own search and demand machinery: quadrature instead of the
// closed-form welfare integrals, nested one-dimensional argmax instead of the
// monopoly first-order conditions, and direct support-pattern enumeration at
// a fixed disutility instead of the piecewise branch tables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.

namespace detail {

template <class F>
double simpson_rec(F&& f, double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 40);
}

// ---------------------------------------------------------------------------
// Grid + golden-section argmax, one and two dimensional.

template <class F>
double grid_golden(F&& f, double lo, double hi, int grid, double tol,
                   double* value_out = nullptr) {
  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < grid; ++k) {
    const double x = lo + (hi - lo) * k / (grid - 1);
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
      best_k = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_k - 1) / (grid - 1);
  double b = lo + (hi - lo) * std::min(grid - 1, best_k + 1) / (grid - 1);
  const double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = f(mid);
  if (fmid >= best_f) {
    best_x = mid;
    best_f = fmid;
  }
  if (value_out != nullptr) *value_out = best_f;
  return best_x;
}

struct Argmax2D {
  double x = 0.0;
  double y = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Nested maximization of f(x, y) over [lo, hi]^2.  Partially maximizing over
// y first keeps the outer objective well-conditioned even when f has a
// near-flat ridge (the hard case for a plain product grid), so the argmax is
// reliable to far better than one part in 1e4 of the box width.
template <class F>
Argmax2D nested_argmax(F&& f, double lo, double hi, int grid = 256) {
  const double tol = 1e-10 * (hi - lo);
  auto inner = [&](double x, double* y_out) {
    double value = 0.0;
    const double y =
        grid_golden([&](double yy) { return f(x, yy); }, lo, hi, grid, tol,
                    &value);
    if (y_out != nullptr) *y_out = y;
    return value;
  };
  Argmax2D out;
  out.x = grid_golden([&](double xx) { return inner(xx, nullptr); }, lo, hi,
                      grid, tol, &out.value);
  inner(out.x, &out.y);
  return out;
}

// ---------------------------------------------------------------------------
// Support-pattern totals at a fixed market disutility d (two APs).
//
// Enumerates the four candidate user splits -- nobody, AP1 only, AP2 only,
// both -- and keeps those whose defining equations and leave-out conditions
// hold at the given d: an active AP's price plus congestion equals d, an
// inactive AP's price plus congestion is at least d.

inline std::vector<double> pattern_totals(double a2, double b1, double p1,
                                          double p2, double d,
                                          double tol = 1e-9) {
  std::vector<double> out;
  if (p1 >= d - tol && p2 >= d - tol) {
    out.push_back(0.0);
  }
  const double x1_solo = d - p1;
  if (x1_solo > tol && p2 + b1 * x1_solo >= d - tol) {
    out.push_back(x1_solo);
  }
  const double x2_solo = d - p2;
  if (x2_solo > tol && p1 + a2 * x2_solo >= d - tol) {
    out.push_back(x2_solo);
  }
  const double det = 1.0 - a2 * b1;
  if (std::abs(det) > 1e-9) {
    const double x1 = ((d - p1) - a2 * (d - p2)) / det;
    const double x2 = ((d - p2) - b1 * (d - p1)) / det;
    if (x1 > tol && x2 > tol) {
      out.push_back(x1 + x2);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// True when every value of `a` has a partner in `b` within `tol`.
inline bool subset_within(const std::vector<double>& a,
                          const std::vector<double>& b, double tol) {
  for (double va : a) {
    bool hit = false;
    for (double vb : b) {
      if (std::abs(va - vb) <= tol) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace oracle
