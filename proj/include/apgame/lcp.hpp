#pragma once

// Linear complementarity formulation of the user (Wardrop) equilibrium.
//
// A flow split x >= 0 is an equilibrium at prices p iff used APs sit at the
// common market disutility and unused APs are no better:
//     x >= 0,   M x + q >= 0,   x^T (M x + q) = 0,
// with M(i,j) = g(j,i) + s and q = p - w.  (Mx + q)_i = p_i + l_i(x) - u(X)
// is AP i's disutility excess over the marginal user's willingness to pay.
//
// Two solvers are provided: solve_lcp_enumerate walks all 2^n support sets
// and is the ground-truth oracle (it finds *every* solution); solve_lcp_lemke
// is the production complementary-pivot path for the unique-solution regime.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "apgame/errors.hpp"
#include "apgame/market.hpp"

namespace apgame {

struct LcpInstance {
  Mat m;
  Vec q;

  int size() const { return static_cast<int>(q.size()); }
};

struct LcpSolution {
  Vec x;
  double residual = 0.0;        // max_i |x_i * (Mx+q)_i|
  std::vector<int> basis;       // active set {i : x_i > 0}, ascending
};

struct LcpEnumeration {
  std::vector<LcpSolution> solutions;  // all distinct solutions, sorted by basis
  int singular_bases = 0;              // support sets skipped as numerically singular
};

struct LcpTolerances {
  double comp = 1e-10;     // complementarity residual cap
  double feas = 1e-9;      // allowed negativity of Mx + q on inactive APs
  double x_clamp = 1e-12;  // flows below this count as zero
  double det = 1e-12;      // basis submatrix singularity threshold
  double dup = 1e-8;       // infinity-norm radius for deduplicating solutions
  int n_enum_max = 12;     // exhaustive enumeration cap (2^n support sets)
  int max_pivots = 500;
};

inline LcpInstance assemble_lcp(const Market& market, const Vec& prices) {
  check_vector(market, prices, "prices");
  const int n = market.n();
  const double s = market.demand.s;
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = market.gains.g(j, i) + s;
    }
  }
  return LcpInstance{std::move(m), prices.array() - market.demand.w};
}

// All principal minors strictly positive => unique LCP solution for every q.
inline bool is_p_matrix(const Mat& m, const LcpTolerances& tol = {}) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("P-matrix test needs a square matrix");
  }
  const int n = static_cast<int>(m.rows());
  if (n > tol.n_enum_max) {
    throw TooLarge("P-matrix test enumerates 2^n minors; n = " +
                   std::to_string(n) + " exceeds cap " +
                   std::to_string(tol.n_enum_max));
  }
  std::vector<int> idx;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int k = static_cast<int>(idx.size());
    Mat sub(k, k);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) sub(r, c) = m(idx[r], idx[c]);
    }
    const double det = k == 1 ? sub(0, 0) : sub.partialPivLu().determinant();
    if (!(det > tol.det)) return false;
  }
  return true;
}

namespace detail {

inline double comp_residual(const LcpInstance& lcp, const Vec& x, Vec* slack_out = nullptr) {
  Vec slack = lcp.m * x + lcp.q;
  double r = 0.0;
  for (int i = 0; i < lcp.size(); ++i) {
    r = std::max(r, std::abs(x[i] * slack[i]));
  }
  if (slack_out) *slack_out = std::move(slack);
  return r;
}

inline std::vector<int> active_set(const Vec& x, double x_clamp) {
  std::vector<int> basis;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] > x_clamp) basis.push_back(i);
  }
  return basis;
}

// Solve the support-set subsystem M_BB x_B = -q_B; returns false when the
// submatrix is singular within tol.det.
inline bool solve_support(const LcpInstance& lcp, const std::vector<int>& basis,
                          const LcpTolerances& tol, Vec& x_out) {
  const int k = static_cast<int>(basis.size());
  Mat sub(k, k);
  Vec rhs(k);
  for (int r = 0; r < k; ++r) {
    rhs[r] = -lcp.q[basis[r]];
    for (int c = 0; c < k; ++c) sub(r, c) = lcp.m(basis[r], basis[c]);
  }
  Eigen::PartialPivLU<Mat> lu(sub);
  if (std::abs(lu.determinant()) <= tol.det) return false;
  Vec xb = lu.solve(rhs);
  x_out = Vec::Zero(lcp.size());
  for (int r = 0; r < k; ++r) x_out[basis[r]] = xb[r];
  return true;
}

}  // namespace detail

// Ground-truth oracle: test every support set B, solve M_BB x_B = -q_B, keep
// supports whose solution is feasible and complementary.  Returns all
// distinct solutions, deduplicated within tol.dup and sorted by active set.
inline LcpEnumeration solve_lcp_enumerate(const LcpInstance& lcp,
                                          const LcpTolerances& tol = {}) {
  const int n = lcp.size();
  if (n > tol.n_enum_max) {
    throw TooLarge("enumeration over 2^n supports; n = " + std::to_string(n) +
                   " exceeds cap " + std::to_string(tol.n_enum_max));
  }
  LcpEnumeration out;
  std::vector<int> basis;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    basis.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) basis.push_back(i);
    }
    Vec x;
    if (basis.empty()) {
      x = Vec::Zero(n);
    } else {
      if (!detail::solve_support(lcp, basis, tol, x)) {
        ++out.singular_bases;
        continue;
      }
      bool positive = true;
      for (int i : basis) {
        if (x[i] < -tol.x_clamp) {
          positive = false;
          break;
        }
        if (x[i] < 0.0) x[i] = 0.0;
      }
      if (!positive) continue;
    }
    Vec slack;
    const double residual = detail::comp_residual(lcp, x, &slack);
    bool feasible = residual <= tol.comp;
    for (int i = 0; i < n && feasible; ++i) {
      if (slack[i] < -tol.feas) feasible = false;
    }
    if (!feasible) continue;
    bool duplicate = false;
    for (const LcpSolution& s : out.solutions) {
      if ((s.x - x).lpNorm<Eigen::Infinity>() <= tol.dup) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    LcpSolution sol;
    sol.basis = detail::active_set(x, tol.x_clamp);
    sol.x = std::move(x);
    sol.residual = residual;
    out.solutions.push_back(std::move(sol));
  }
  std::sort(out.solutions.begin(), out.solutions.end(),
            [](const LcpSolution& a, const LcpSolution& b) {
              return a.basis < b.basis;
            });
  return out;
}

// Lemke complementary pivoting with lexicographic tie-breaking.  Intended for
// the unique-solution (P-matrix) regime, where it terminates with the
// solution; elsewhere it may end on a secondary ray (RayTermination).
inline LcpSolution solve_lcp_lemke(const LcpInstance& lcp,
                                   const LcpTolerances& tol = {}) {
  const int n = lcp.size();
  const double piv_tol = 1e-11;

  auto finish = [&](Vec x) {
    // Re-solving on the final active set strips accumulated pivot error.
    std::vector<int> basis = detail::active_set(x, tol.x_clamp);
    if (!basis.empty()) {
      Vec polished;
      if (detail::solve_support(lcp, basis, tol, polished)) {
        bool ok = true;
        Vec slack;
        const double res = detail::comp_residual(lcp, polished, &slack);
        for (int i = 0; i < n && ok; ++i) {
          if (polished[i] < -tol.x_clamp || slack[i] < -tol.feas) ok = false;
        }
        if (ok && res <= tol.comp) {
          for (int i = 0; i < n; ++i) {
            if (polished[i] < 0.0) polished[i] = 0.0;
          }
          x = std::move(polished);
        }
      }
    }
    LcpSolution sol;
    sol.basis = detail::active_set(x, tol.x_clamp);
    Vec slack;
    sol.residual = detail::comp_residual(lcp, x, &slack);
    for (int i = 0; i < n; ++i) {
      if (x[i] < -tol.x_clamp || slack[i] < -tol.feas || sol.residual > tol.comp) {
        throw SolveFailure("Lemke produced an invalid solution (entry " +
                           std::to_string(i) + ")");
      }
    }
    sol.x = std::move(x);
    return sol;
  };

  if (lcp.q.minCoeff() >= -tol.feas) {
    return finish(Vec::Zero(n));  // trivial solution, zero pivots
  }

  // Tableau [ I | -M | -1 | q ]; columns 0..n-1 carry w, n..2n-1 carry z,
  // 2n the auxiliary z0, 2n+1 the right-hand side.
  const int qcol = 2 * n + 1;
  Mat tab(n, 2 * n + 2);
  tab.leftCols(n) = Mat::Identity(n, n);
  tab.middleCols(n, n) = -lcp.m;
  tab.col(2 * n) = Vec::Constant(n, -1.0);
  tab.col(qcol) = lcp.q;

  std::vector<int> basic(n);
  for (int i = 0; i < n; ++i) basic[i] = i;  // w_i basic

  auto pivot = [&](int row, int col) {
    tab.row(row) /= tab(row, col);
    for (int r = 0; r < n; ++r) {
      if (r != row && tab(r, col) != 0.0) {
        tab.row(r) -= tab(r, col) * tab.row(row);
      }
    }
    // The RHS stays non-negative in exact arithmetic; clamp rounding dust.
    for (int r = 0; r < n; ++r) {
      if (tab(r, qcol) < 0.0 && tab(r, qcol) > -piv_tol) tab(r, qcol) = 0.0;
    }
    basic[row] = col;
  };

  int row0;
  lcp.q.minCoeff(&row0);
  int leaving = basic[row0];
  pivot(row0, 2 * n);

  for (int iter = 0; iter < tol.max_pivots; ++iter) {
    // Complementary rule: the mate of the variable that just left enters.
    const int entering = leaving < n ? leaving + n : leaving - n;

    int row = -1;
    for (int r = 0; r < n; ++r) {
      const double c = tab(r, entering);
      if (c <= piv_tol) continue;
      if (row < 0) {
        row = r;
        continue;
      }
      const double diff = tab(r, qcol) * tab(row, entering) -
                          tab(row, qcol) * tab(r, entering);
      if (diff < -piv_tol) {
        row = r;
      } else if (std::abs(diff) <= piv_tol) {
        // Tie: prefer dropping z0 (terminates), else lexicographic minimum
        // over the identity-born columns for cycle-free degeneracy handling.
        if (basic[r] == 2 * n) {
          row = r;
          continue;
        }
        if (basic[row] == 2 * n) continue;
        for (int c2 = 0; c2 < n; ++c2) {
          const double d2 = tab(r, c2) * tab(row, entering) -
                            tab(row, c2) * tab(r, entering);
          if (std::abs(d2) > piv_tol) {
            if (d2 < 0.0) row = r;
            break;
          }
        }
      }
    }
    if (row < 0) {
      throw RayTermination(
          "Lemke ended on a secondary ray; no complementary solution found "
          "along this path");
    }

    leaving = basic[row];
    pivot(row, entering);

    if (leaving == 2 * n) {  // z0 left: complementary basic solution reached
      Vec x = Vec::Zero(n);
      for (int r = 0; r < n; ++r) {
        if (basic[r] >= n && basic[r] < 2 * n) {
          x[basic[r] - n] = std::max(0.0, tab(r, qcol));
        }
      }
      return finish(std::move(x));
    }
  }
  throw MaxPivots("Lemke exceeded " + std::to_string(tol.max_pivots) +
                  " pivots");
}

}  // namespace apgame
