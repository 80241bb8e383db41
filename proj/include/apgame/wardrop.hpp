#pragma once

// User-equilibrium analysis.
//
// wardrop_equilibrium routes through the LCP solvers: Lemke under weak
// interference (unique solution), exhaustive support enumeration otherwise.
//
// For two APs the equilibrium structure is fully characterized by the total
// demand correspondence f(d): the aggregate flow(s) consistent with a common
// market disutility d.  f is piecewise linear; its pieces are determined by
// which (a2, b1) region the market falls into, and the equilibria are exactly
// the crossings of f(d) with the inverse demand line u^{-1}(d) = (w - d)/s.
// With strong cross interference f can be non-monotone or multi-valued, which
// is where multiple equilibria come from.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "apgame/errors.hpp"
#include "apgame/lcp.hpp"
#include "apgame/market.hpp"

namespace apgame {

inline constexpr double kTauWe = 1e-8;  // Wardrop-condition residual cap

struct WardropResult {
  Vec flows;                          // representative equilibrium (first by support)
  std::optional<double> disutility;   // u(total); absent when no user enters
  bool unique = true;
  std::vector<Vec> all_equilibria;    // every distinct equilibrium found
};

inline WardropResult wardrop_equilibrium(const Market& market,
                                         const Vec& prices,
                                         const LcpTolerances& tol = {}) {
  const LcpInstance lcp = assemble_lcp(market, prices);
  WardropResult result;
  if (market.weak_interference) {
    result.unique = true;
    try {
      result.flows = solve_lcp_lemke(lcp, tol).x;
    } catch (const NumericError&) {
      // Rare pivot trouble on degenerate inputs: fall back to the oracle.
      LcpEnumeration all = solve_lcp_enumerate(lcp, tol);
      if (all.solutions.empty()) throw;
      result.flows = all.solutions.front().x;
    }
    result.all_equilibria.push_back(result.flows);
  } else {
    LcpEnumeration all = solve_lcp_enumerate(lcp, tol);
    if (all.solutions.empty()) {
      throw SolveFailure(
          "no equilibrium found by enumeration (" +
          std::to_string(all.singular_bases) +
          " singular support(s) skipped); market is degenerate");
    }
    for (const LcpSolution& s : all.solutions) {
      result.all_equilibria.push_back(s.x);
    }
    result.flows = result.all_equilibria.front();
    result.unique = result.all_equilibria.size() == 1;
  }
  const double total = result.flows.sum();
  if (total > 0.0) {
    result.disutility = market.demand.value(total);
  }
  return result;
}

// Number of distinct user equilibria at the given prices (oracle route).
inline int count_equilibria(const Market& market, const Vec& prices,
                            const LcpTolerances& tol = {}) {
  return static_cast<int>(
      solve_lcp_enumerate(assemble_lcp(market, prices), tol).solutions.size());
}

namespace detail {

// Unrolled two-AP support walk in the same {} < {0} < {0,1} < {1} order the
// enumeration oracle reports, so both routes pick the same representative.
inline bool we2(double m11, double m12, double m21, double m22, double q1,
                double q2, const LcpTolerances& tol, double& x1, double& x2) {
  if (q1 >= -tol.feas && q2 >= -tol.feas) {
    x1 = x2 = 0.0;
    return true;
  }
  {
    const double v = -q1 / m11;
    if (v >= -tol.x_clamp && m21 * v + q2 >= -tol.feas) {
      x1 = std::max(0.0, v);
      x2 = 0.0;
      return true;
    }
  }
  {
    const double det = m11 * m22 - m12 * m21;
    if (std::abs(det) > tol.det) {
      const double v1 = (-q1 * m22 + q2 * m12) / det;
      const double v2 = (-m11 * q2 + m21 * q1) / det;
      if (v1 >= -tol.x_clamp && v2 >= -tol.x_clamp) {
        x1 = std::max(0.0, v1);
        x2 = std::max(0.0, v2);
        return true;
      }
    }
  }
  {
    const double v = -q2 / m22;
    if (v >= -tol.x_clamp && m12 * v + q1 >= -tol.feas) {
      x1 = 0.0;
      x2 = std::max(0.0, v);
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Representative equilibrium flows only.  Lean path for optimization loops;
// agrees with wardrop_equilibrium(...).flows.
inline Vec equilibrium_flows(const Market& market, const Vec& prices,
                             const LcpTolerances& tol = {}) {
  if (market.n() == 2) {
    const Mat& g = market.gains.g;
    const double s = market.demand.s;
    const double w = market.demand.w;
    Vec x(2);
    if (detail::we2(1.0 + s, g(1, 0) + s, g(0, 1) + s, 1.0 + s,
                    prices[0] - w, prices[1] - w, tol, x[0], x[1])) {
      return x;
    }
    throw SolveFailure("no two-AP equilibrium support admits a solution");
  }
  return wardrop_equilibrium(market, prices, tol).flows;
}

// ---------------------------------------------------------------------------
// Two-AP region taxonomy (prices ordered p1 <= p2 <= u0; callers with
// p1 > p2 swap AP labels first).

// Support pattern of a flow split at a fixed market disutility d.
enum class FlowSupport { none, ap1_only, ap2_only, both };

// Region of the (a2, b1) plane at a *fixed* d in (p2, u0): which support
// patterns admit a solution.  Region III admits all three.
enum class CoarseRegion { I, II, III, IV };

// Region of the (a2, b1) plane given prices and the demand intercept u0;
// determines the shape of the whole f(d) curve on (p2, u0).
enum class FineRegion { a, b, c, d, e };

inline const char* to_string(CoarseRegion r) {
  switch (r) {
    case CoarseRegion::I: return "I";
    case CoarseRegion::II: return "II";
    case CoarseRegion::III: return "III";
    default: return "IV";
  }
}

inline const char* to_string(FineRegion r) {
  switch (r) {
    case FineRegion::a: return "a";
    case FineRegion::b: return "b";
    case FineRegion::c: return "c";
    case FineRegion::d: return "d";
    default: return "e";
  }
}

namespace detail {

inline void check_two_ap_inputs(double a2, double b1, double p1, double p2,
                                double u0) {
  if (!std::isfinite(a2) || !std::isfinite(b1) || a2 < 0.0 || b1 < 0.0) {
    throw InvalidArgument("cross gains a2, b1 must be finite and >= 0");
  }
  if (!std::isfinite(p1) || !std::isfinite(p2) || p1 < 0.0) {
    throw InvalidArgument("prices must be finite and non-negative");
  }
  if (p1 > p2) {
    throw BadPriceOrder("two-AP analysis expects p1 <= p2; swap AP labels");
  }
  if (!(u0 > 0.0) || p2 > u0) {
    throw InvalidArgument("prices must satisfy p2 <= u0 with u0 > 0");
  }
}

}  // namespace detail

// Classify at fixed market disutility d (p2 <= d).  Thresholds are compared
// cross-multiplied so d == p2 needs no special casing.
inline CoarseRegion classify_coarse(double a2, double b1, double p1, double p2,
                                    double d) {
  detail::check_two_ap_inputs(a2, b1, p1, p2, std::max(d, p2));
  if (d < p2) {
    throw InvalidArgument("coarse region is defined for d >= p2");
  }
  const double da = d - p1;
  const double db = d - p2;
  const bool a_hi = a2 * db >= da;  // AP1 can be priced out at this d
  const bool b_hi = b1 * da >= db;  // AP2 can be priced out at this d
  if (a_hi && b_hi) return CoarseRegion::III;
  if (a_hi) return CoarseRegion::II;
  if (b_hi) return CoarseRegion::IV;
  return CoarseRegion::I;
}

// Classify the f(d) shape from prices and u0.  Boundary ties go to the
// closure of the region listed first in the taxonomy.
inline FineRegion classify_region(double a2, double b1, double p1, double p2,
                                  double u0) {
  detail::check_two_ap_inputs(a2, b1, p1, p2, u0);
  const double ua = u0 - p1;
  const double ub = u0 - p2;
  const bool a_lt = a2 * ub < ua;   // a2 below (u0-p1)/(u0-p2)
  const bool b_le = b1 * ua <= ub;  // b1 at most (u0-p2)/(u0-p1)
  if (a_lt) return b_le ? FineRegion::a : FineRegion::e;
  if (b_le) return a2 * b1 < 1.0 ? FineRegion::b : FineRegion::c;
  return FineRegion::d;
}

// One linear expression of the total-demand correspondence together with the
// flow split that produces it: total = slope*d + offset, x1 = x1_slope*d +
// x1_offset, x2 = total - x1.
struct DemandExpr {
  FlowSupport support = FlowSupport::both;
  double slope = 0.0;
  double offset = 0.0;
  double x1_slope = 0.0;
  double x1_offset = 0.0;

  double total(double d) const { return slope * d + offset; }
  Eigen::Vector2d flows(double d) const {
    const double x1 = std::max(0.0, x1_slope * d + x1_offset);
    const double x2 = std::max(0.0, total(d) - x1);
    return {x1, x2};
  }
  bool increasing() const { return slope >= 0.0; }
};

// A maximal interval of d over which the admitted expression set is constant.
struct DemandBranch {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_incl = false;
  bool hi_incl = false;
  std::vector<DemandExpr> exprs;
  bool increasing = true;  // all admitted expressions non-decreasing

  bool contains(double d) const {
    const bool above = lo_incl ? d >= lo : d > lo;
    const bool below = hi_incl ? d <= hi : d < hi;
    return above && below;
  }
};

// Slope of the interior (both-APs) expression; negative exactly when
// a2 + b1 > 2 with a2*b1 < 1, or a2 + b1 < 2 with a2*b1 > 1.
inline double interior_slope(double a2, double b1) {
  return (2.0 - a2 - b1) / (1.0 - a2 * b1);
}

namespace detail {

inline DemandExpr single_ap_expr(FlowSupport support, double price) {
  DemandExpr e;
  e.support = support;
  e.slope = 1.0;
  e.offset = -price;
  if (support == FlowSupport::ap1_only) {
    e.x1_slope = 1.0;
    e.x1_offset = -price;
  }
  return e;
}

inline DemandExpr interior_expr(double a2, double b1, double p1, double p2) {
  const double den = 1.0 - a2 * b1;
  DemandExpr e;
  e.support = FlowSupport::both;
  e.slope = (2.0 - a2 - b1) / den;
  e.offset = ((a2 - 1.0) * p2 + (b1 - 1.0) * p1) / den;
  e.x1_slope = (1.0 - a2) / den;
  e.x1_offset = (a2 * p2 - p1) / den;
  return e;
}

// Breakpoint where the lower-priced AP alone stops being an equilibrium
// support: (p2 - b1*p1)/(1 - b1), +inf in the b1 -> 1 limit.
inline double breakpoint_x2_on(double b1, double p1, double p2) {
  const double den = 1.0 - b1;
  if (std::abs(den) <= 1e-12) return std::numeric_limits<double>::infinity();
  return (p2 - b1 * p1) / den;
}

// Breakpoint tied to AP1's flow vanishing: (p1 - a2*p2)/(1 - a2), +inf in
// the a2 -> 1 limit.
inline double breakpoint_x1_off(double a2, double p1, double p2) {
  const double den = 1.0 - a2;
  if (std::abs(den) <= 1e-12) return std::numeric_limits<double>::infinity();
  return (p1 - a2 * p2) / den;
}

}  // namespace detail

// Piecewise description of f(d) on (p1, u0).  Branch intervals tile the
// domain; multi-expression branches list every admitted support pattern.
inline std::vector<DemandBranch> demand_branches(double a2, double b1,
                                                 double p1, double p2,
                                                 double u0) {
  detail::check_two_ap_inputs(a2, b1, p1, p2, u0);
  std::vector<DemandBranch> out;
  if (p1 >= u0) return out;  // priced beyond the choke point: no demand at all

  const DemandExpr ap1 = detail::single_ap_expr(FlowSupport::ap1_only, p1);
  const DemandExpr ap2 = detail::single_ap_expr(FlowSupport::ap2_only, p2);
  const bool interior_singular = std::abs(1.0 - a2 * b1) <= 1e-12;

  auto add = [&](double lo, double hi, bool lo_incl, bool hi_incl,
                 std::vector<DemandExpr> exprs) {
    lo = std::max(lo, p1);
    if (hi > u0) {
      hi = u0;
      hi_incl = false;
    }
    if (!(lo < hi) && !(lo == hi && lo_incl && hi_incl)) return;
    DemandBranch b;
    b.lo = lo;
    b.hi = hi;
    b.lo_incl = lo_incl;
    b.hi_incl = hi_incl;
    b.increasing = true;
    for (const DemandExpr& e : exprs) {
      if (!e.increasing()) b.increasing = false;
    }
    b.exprs = std::move(exprs);
    out.push_back(std::move(b));
  };

  const FineRegion region = classify_region(a2, b1, p1, p2, u0);
  const double bx2 = detail::breakpoint_x2_on(b1, p1, p2);
  const double bx1 = detail::breakpoint_x1_off(a2, p1, p2);

  switch (region) {
    case FineRegion::a:
      add(p1, bx2, false, true, {ap1});
      if (!interior_singular) {
        add(bx2, u0, false, false, {detail::interior_expr(a2, b1, p1, p2)});
      }
      break;
    case FineRegion::b:
      add(p1, bx2, false, true, {ap1});
      if (!interior_singular) {
        add(bx2, bx1, false, false, {detail::interior_expr(a2, b1, p1, p2)});
      }
      add(bx1, u0, true, false, {ap2});
      break;
    case FineRegion::c: {
      // The multi branch owns its junction points: at d = bx1 (resp. bx2)
      // the single-AP pattern from the adjacent branch is still admissible
      // with its leave-out condition tight, so the set there is genuinely
      // multi-valued and the single-AP branches must stay open.
      add(p1, bx1, false, false, {ap1});
      std::vector<DemandExpr> multi{ap1, ap2};
      if (!interior_singular) {
        multi.push_back(detail::interior_expr(a2, b1, p1, p2));
      }
      add(bx1, bx2, true, true, std::move(multi));
      add(bx2, u0, false, false, {ap2});
      break;
    }
    case FineRegion::d: {
      add(p1, bx1, false, false, {ap1});
      std::vector<DemandExpr> multi{ap1, ap2};
      if (!interior_singular) {
        multi.push_back(detail::interior_expr(a2, b1, p1, p2));
      }
      add(bx1, u0, true, false, std::move(multi));
      break;
    }
    case FineRegion::e:
      add(p1, u0, false, false, {ap1});
      break;
  }
  return out;
}

// The set of total demands f(d) admitted at market disutility d, ascending.
inline std::vector<double> total_demand(double a2, double b1, double p1,
                                        double p2, double d, double u0) {
  detail::check_two_ap_inputs(a2, b1, p1, p2, u0);
  if (!(d > 0.0) || !(d < u0)) {
    throw InvalidArgument("total demand is defined for d in (0, u0)");
  }
  if (d <= p1) return {0.0};

  const std::vector<DemandBranch> branches = demand_branches(a2, b1, p1, p2, u0);
  const DemandBranch* hit = nullptr;
  for (const DemandBranch& b : branches) {
    if (b.contains(d)) {
      hit = &b;
      break;
    }
  }
  if (hit == nullptr) {
    // Only reachable on degenerate inputs (e.g. singular interior support
    // dropped); report rather than invent a value.
    throw SolveFailure("no demand branch covers d = " + std::to_string(d));
  }
  std::vector<double> values;
  values.reserve(hit->exprs.size());
  for (const DemandExpr& e : hit->exprs) {
    values.push_back(std::max(0.0, e.total(d)));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end(),
                           [](double x, double y) {
                             return std::abs(x - y) <= 1e-11;
                           }),
               values.end());
  return values;
}

// One crossing of the total-demand correspondence with the inverse demand
// line u^{-1}(d): an equilibrium disutility, total flow and flow split.
struct DemandCrossing {
  double d = 0.0;
  double total = 0.0;
  Eigen::Vector2d flows = {0.0, 0.0};
};

// Analytic equilibrium finder for two APs: intersect every admitted branch
// expression with u^{-1}(d) = (w - d)/s.  Cross-check for the LCP route.
// Degenerate markets with a2*b1 = 1 collapse the both-AP family to a
// vertical segment at the coincident breakpoint; that single-disutility
// continuum has no linear branch expression and is not enumerated here.
inline std::vector<DemandCrossing> demand_crossings(const Market& market,
                                                    const Vec& prices) {
  if (market.n() != 2) {
    throw DimensionMismatch("demand_crossings analyses two-AP markets");
  }
  check_vector(market, prices, "prices");
  const double w = market.demand.w;
  const double s = market.demand.s;

  const bool swapped = prices[0] > prices[1];
  const double p1 = swapped ? prices[1] : prices[0];
  const double p2 = swapped ? prices[0] : prices[1];
  const double a2 = swapped ? market.gains.b1() : market.gains.a2();
  const double b1 = swapped ? market.gains.a2() : market.gains.b1();

  std::vector<DemandCrossing> out;
  auto push = [&](double d, double total, Eigen::Vector2d x) {
    for (const DemandCrossing& c : out) {
      if (std::abs(c.d - d) <= 1e-9 && std::abs(c.total - total) <= 1e-9) {
        return;
      }
    }
    if (swapped) std::swap(x[0], x[1]);
    out.push_back(DemandCrossing{d, total, x});
  };

  if (p1 >= w) {
    // Both APs priced at or beyond the choke point: the empty split is the
    // unique equilibrium, pinned at the choke disutility.
    push(w, 0.0, {0.0, 0.0});
    return out;
  }
  if (p2 >= w) {
    const double d = (w + s * p1) / (1.0 + s);
    push(d, d - p1, {d - p1, 0.0});
    return out;
  }

  for (const DemandBranch& b : demand_branches(a2, b1, p1, p2, w)) {
    for (const DemandExpr& e : b.exprs) {
      const double den = e.slope + 1.0 / s;
      if (std::abs(den) <= 1e-12) continue;  // parallel to the demand line
      const double d = (w / s - e.offset) / den;
      if (d < b.lo - 1e-12 || d > b.hi + 1e-12) continue;
      const double total = e.total(d);
      if (total < -1e-12) continue;
      push(d, std::max(0.0, total), e.flows(d));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DemandCrossing& x, const DemandCrossing& y) {
              return x.d < y.d;
            });
  return out;
}

}  // namespace apgame
