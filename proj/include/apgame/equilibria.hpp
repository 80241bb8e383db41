#pragma once

// Provider-side equilibria on top of the user-equilibrium map p -> x(p).
//
// Monopoly ("one operator owns every AP"):
//   * price-discriminating: maximize total profit over per-AP prices.  For
//     two weakly-coupled APs the optimum is interior and solves the
//     stationarity system (M + M^T) x = w, p = w - M x.
//   * uniform price: the optimum is p = w/2 at every AP regardless of the
//     interference gains; flows still route through the equilibrium solver
//     so one-sided zero-flow outcomes are reported faithfully.
//
// Duopoly (each AP owned by a separate provider): the closed forms split by
// interference strength.  With a2, b1 <= 1 the interior best-response
// intersection is the unique equilibrium.  When one cross gain exceeds 1 the
// strong provider weighs coexistence against pricing the rival's AP out of
// the market entirely ("expel"); the expelled side's price is indeterminate
// and reported as 0 by convention.
//
// best_response / br_iterate provide the numeric search path used both as an
// independent check of the closed forms and as the fallback when their
// hypotheses fail (strong coupling, n != 2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "apgame/errors.hpp"
#include "apgame/market.hpp"
#include "apgame/wardrop.hpp"

namespace apgame {

enum class EqKind { monopoly_pd, monopoly_uniform, duopoly };

inline const char* to_string(EqKind k) {
  switch (k) {
    case EqKind::monopoly_pd: return "me_pd";
    case EqKind::monopoly_uniform: return "me_uniform";
    default: return "de";
  }
}

struct EquilibriumReport {
  EqKind kind = EqKind::duopoly;
  Vec prices;
  Vec flows;    // user equilibrium at `prices`
  Vec profits;  // prices .* flows
  std::string case_tag;
  bool converged = true;
};

struct SearchOptions {
  int grid_points = 1024;     // coarse profit grid on [0, w]
  double golden_tol = 1e-10;  // golden-section bracket width, price units
  // Fixed-point stop (inf-norm of a full sweep's price change).  Grid+golden
  // argmaxes carry ~sqrt(eps)*w evaluation noise near flat profit peaks, so
  // anything much below 1e-7 chases noise instead of converging.
  double fix_tol = 1e-7;
  int max_sweeps = 200;
  bool analytic_br = false;   // interior closed-form responses (two weak APs)
};

namespace detail {

inline EquilibriumReport make_report(const Market& market, EqKind kind,
                                     Vec prices, std::string case_tag) {
  EquilibriumReport rep;
  rep.kind = kind;
  rep.flows = wardrop_equilibrium(market, prices).flows;
  rep.profits = prices.cwiseProduct(rep.flows);
  rep.prices = std::move(prices);
  rep.case_tag = std::move(case_tag);
  return rep;
}

inline Mat equilibrium_matrix(const Market& market) {
  const int n = market.n();
  const double s = market.demand.s;
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = market.gains.g(j, i) + s;
  }
  return m;
}

template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  constexpr double phi = 0.6180339887498949;  // (sqrt(5)-1)/2
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Coarse grid scan followed by golden-section refinement of the best cell.
template <class F>
double grid_golden_max(F&& f, double lo, double hi, int grid_points,
                       double tol, double* value_out = nullptr) {
  const int g = std::max(grid_points, 4);
  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < g; ++k) {
    const double x = lo + (hi - lo) * k / (g - 1);
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
      best_k = k;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best_k - 1) / (g - 1);
  const double b = lo + (hi - lo) * std::min(g - 1, best_k + 1) / (g - 1);
  double x = golden_max(f, a, b, tol);
  double fx = f(x);
  if (fx < best_f) {
    x = best_x;
    fx = best_f;
  }
  if (value_out) *value_out = fx;
  return x;
}

}  // namespace detail

// Price-discriminating monopoly, closed form (two APs, weak interference).
inline EquilibriumReport monopoly_pd(const Market& market) {
  if (market.n() != 2) {
    throw HypothesisViolated(
        "monopoly_pd closed form covers exactly two APs; use "
        "monopoly_pd_numeric for other sizes");
  }
  if (!market.weak_interference) {
    throw HypothesisViolated(
        "monopoly_pd closed form needs weak interference (a2 + b1 < 2)");
  }
  const Mat m = detail::equilibrium_matrix(market);
  const Vec wv = Vec::Constant(market.n(), market.demand.w);
  // Total profit p^T M^{-1} (w - p) is stationary where (M + M^T) x = w;
  // under weak interference M + M^T is positive definite, so this is the
  // unique interior maximizer.
  const Vec x = (m + m.transpose()).ldlt().solve(wv);
  Vec p = wv - m * x;
  return detail::make_report(market, EqKind::monopoly_pd, std::move(p),
                             "closed-form");
}

// Uniform-price monopoly, closed form: p = w/2 at every AP.
inline EquilibriumReport monopoly_uniform(const Market& market) {
  if (market.n() != 2) {
    throw HypothesisViolated(
        "monopoly_uniform closed form covers exactly two APs");
  }
  if (!market.weak_interference) {
    throw HypothesisViolated(
        "monopoly_uniform closed form needs weak interference (a2 + b1 < 2)");
  }
  Vec p = Vec::Constant(market.n(), 0.5 * market.demand.w);
  return detail::make_report(market, EqKind::monopoly_uniform, std::move(p),
                             "closed-form");
}

// Duopoly equilibrium, closed form (two APs, weak interference).
inline EquilibriumReport duopoly(const Market& market) {
  if (market.n() != 2) {
    throw HypothesisViolated("duopoly closed forms cover exactly two APs");
  }
  if (!market.weak_interference) {
    throw HypothesisViolated(
        "duopoly closed forms need weak interference (a2 + b1 < 2); use "
        "br_iterate");
  }
  const double w = market.demand.w;
  const double s = market.demand.s;
  const double a2 = market.gains.a2();
  const double b1 = market.gains.b1();

  // Interior best-response intersection (the equilibrium when a2, b1 <= 1).
  const double den = 4.0 * (1.0 + s) * (1.0 + s) - (s + a2) * (s + b1);
  const double p1s = w * ((a2 + s) * (1.0 - b1) + 2.0 * (1.0 - a2) * (1.0 + s)) / den;
  const double p2s = w * ((b1 + s) * (1.0 - a2) + 2.0 * (1.0 - b1) * (1.0 + s)) / den;

  if (a2 <= 1.0 && b1 <= 1.0) {
    Vec p(2);
    p << p1s, p2s;
    return detail::make_report(market, EqKind::duopoly, std::move(p), "case1");
  }

  const double delta = (1.0 + s) * (1.0 + s) - (s + a2) * (s + b1);
  if (a2 > 1.0) {
    // Provider 2 can expel provider 1; compare against coexistence profit.
    const double x2s = ((w - p2s) * (1.0 + s) - (w - p1s) * (b1 + s)) / delta;
    const double expel_profit = (a2 - 1.0) * w * w / ((s + a2) * (s + a2));
    if (p2s * x2s > expel_profit) {
      if (p1s < 0.0 || p2s < 0.0) {
        throw SolveFailure(
            "duopoly coexistence candidate has a negative price; outside the "
            "closed-form regime");
      }
      Vec p(2);
      p << p1s, p2s;
      return detail::make_report(market, EqKind::duopoly, std::move(p),
                                 "case2-coexist");
    }
    Vec p(2);
    p << 0.0, (a2 - 1.0) * w / (s + a2);
    return detail::make_report(market, EqKind::duopoly, std::move(p),
                               "case2-expel");
  }

  // b1 > 1: mirror image, provider 1 is the strong side.
  const double x1s = ((w - p1s) * (1.0 + s) - (w - p2s) * (a2 + s)) / delta;
  const double expel_profit = (b1 - 1.0) * w * w / ((s + b1) * (s + b1));
  if (p1s * x1s > expel_profit) {
    if (p1s < 0.0 || p2s < 0.0) {
      throw SolveFailure(
          "duopoly coexistence candidate has a negative price; outside the "
          "closed-form regime");
    }
    Vec p(2);
    p << p1s, p2s;
    return detail::make_report(market, EqKind::duopoly, std::move(p),
                               "case3-coexist");
  }
  Vec p(2);
  p << (b1 - 1.0) * w / (s + b1), 0.0;
  return detail::make_report(market, EqKind::duopoly, std::move(p),
                             "case3-expel");
}

struct BestResponse {
  double price = 0.0;
  bool positive_profit = false;  // false: profit is flat zero, price pinned to 0
};

// Profit-maximizing price for one provider with the others' prices held
// fixed.  Numeric path: coarse grid + golden refinement of p_i * x_i(p).
// Analytic path (two weak APs): interior first-order condition, clipped to
// [0, w]; only valid where best responses are interior.
inline BestResponse best_response(const Market& market, int ap,
                                  const Vec& prices,
                                  const SearchOptions& opts = {}) {
  if (ap < 0 || ap >= market.n()) {
    throw InvalidArgument("best_response: AP index out of range");
  }
  check_vector(market, prices, "prices");
  const double w = market.demand.w;

  if (opts.analytic_br) {
    if (market.n() != 2 || !market.weak_interference) {
      throw HypothesisViolated(
          "analytic best response needs two weakly-coupled APs");
    }
    const double s = market.demand.s;
    const double cross = ap == 0 ? market.gains.a2() : market.gains.b1();
    const double other = prices[1 - ap];
    double p = ((cross + s) * other + w * (1.0 - cross)) / (2.0 * (1.0 + s));
    p = std::clamp(p, 0.0, w);
    Vec pv = prices;
    pv[ap] = p;
    const double profit = p * equilibrium_flows(market, pv)[ap];
    return {p, profit > 0.0};
  }

  Vec pv = prices;
  auto profit = [&](double p) {
    pv[ap] = p;
    return p * equilibrium_flows(market, pv)[ap];
  };
  double best_profit = 0.0;
  const double p = detail::grid_golden_max(profit, 0.0, w, opts.grid_points,
                                           opts.golden_tol * w, &best_profit);
  if (!(best_profit > 0.0)) {
    return {0.0, false};
  }
  return {p, true};
}

// Synchronous best-response sweeps (ascending AP order, latest prices) until
// the update shrinks below fix_tol or max_sweeps runs out.  Non-convergence
// is reported via the `converged` flag, not hidden.
inline EquilibriumReport br_iterate(const Market& market, Vec init,
                                    const SearchOptions& opts = {}) {
  check_vector(market, init, "initial prices");
  Vec p = std::move(init);
  bool converged = false;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    const Vec prev = p;
    for (int i = 0; i < market.n(); ++i) {
      p[i] = best_response(market, i, p, opts).price;
    }
    converged = (p - prev).lpNorm<Eigen::Infinity>() < opts.fix_tol;
  }
  EquilibriumReport rep = detail::make_report(
      market, EqKind::duopoly, std::move(p),
      opts.analytic_br ? "br-analytic" : "br-numeric");
  rep.converged = converged;
  return rep;
}

// Numeric price-discriminating monopoly: cyclic coordinate ascent on total
// profit.  Works for any n and any interference strength; used where the
// closed form's hypothesis fails.
inline EquilibriumReport monopoly_pd_numeric(const Market& market,
                                             const SearchOptions& opts = {}) {
  const int n = market.n();
  const double w = market.demand.w;
  Vec p = Vec::Constant(n, 0.5 * w);
  bool converged = false;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    const Vec prev = p;
    for (int i = 0; i < n; ++i) {
      auto total_profit = [&](double v) {
        p[i] = v;
        return p.dot(equilibrium_flows(market, p));
      };
      p[i] = detail::grid_golden_max(total_profit, 0.0, w, opts.grid_points,
                                     opts.golden_tol * w);
    }
    converged = (p - prev).lpNorm<Eigen::Infinity>() < opts.fix_tol;
  }
  EquilibriumReport rep = detail::make_report(market, EqKind::monopoly_pd,
                                              std::move(p), "grid-ascent");
  rep.converged = converged;
  return rep;
}

// Numeric uniform-price monopoly: one common price on [0, w].
inline EquilibriumReport monopoly_uniform_numeric(
    const Market& market, const SearchOptions& opts = {}) {
  const int n = market.n();
  const double w = market.demand.w;
  auto total_profit = [&](double v) {
    const Vec pv = Vec::Constant(n, v);
    return v * equilibrium_flows(market, pv).sum();
  };
  const double c = detail::grid_golden_max(total_profit, 0.0, w,
                                           opts.grid_points,
                                           opts.golden_tol * w);
  return detail::make_report(market, EqKind::monopoly_uniform,
                             Vec::Constant(n, c), "grid");
}

}  // namespace apgame
