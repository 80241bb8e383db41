#pragma once

// Self-contained cross-validation suites.  Each suite checks one pillar of
// the implementation against an independent route (exhaustive enumeration vs
// pivoting, closed forms vs numeric search, theorem bounds vs definitional
// sweeps) and reports pass/fail plus the extremal statistics it observed.
// The CLI `verify` subcommand and the acceptance tests both run these.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "apgame/equilibria.hpp"
#include "apgame/lcp.hpp"
#include "apgame/market.hpp"
#include "apgame/metrics.hpp"
#include "apgame/samplers.hpp"
#include "apgame/wardrop.hpp"

namespace apgame {

struct SuiteResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

namespace detail {

template <class... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return std::string(buf);
}

}  // namespace detail

// Pivoting solver vs exhaustive support enumeration on random weak markets:
// flows must agree to 1e-8, the equilibrium must be unique, and both
// solutions must satisfy complementarity to 1e-10.
inline SuiteResult verify_lcp_oracle(std::uint64_t seed, int n_markets = 1000,
                                     int n_max = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(1, n_max);
  const LcpTolerances tol;
  int failures = 0;
  double max_dev = 0.0;
  double max_resid = 0.0;
  for (int k = 0; k < n_markets; ++k) {
    const Market market = sample_weak_market(rng, n_dist(rng));
    const Vec prices = sample_prices(rng, market);
    const LcpInstance lcp = assemble_lcp(market, prices);
    const LcpEnumeration all = solve_lcp_enumerate(lcp, tol);
    const LcpSolution piv = solve_lcp_lemke(lcp, tol);
    bool ok = all.solutions.size() == 1;
    if (ok) {
      const double dev =
          (all.solutions.front().x - piv.x).lpNorm<Eigen::Infinity>();
      const double resid =
          std::max(all.solutions.front().residual, piv.residual);
      max_dev = std::max(max_dev, dev);
      max_resid = std::max(max_resid, resid);
      ok = dev <= 1e-8 && resid <= tol.comp;
    }
    if (!ok) ++failures;
  }
  SuiteResult r;
  r.name = "lcp-oracle";
  r.ok = failures == 0;
  r.detail = detail::fmt(
      "%d markets (n<=%d): %d failure(s), max flow deviation %.3e, "
      "max complementarity residual %.3e",
      n_markets, n_max, failures, max_dev, max_resid);
  return r;
}

// Weak interference must imply the equilibrium matrix is a P-matrix (all
// principal minors positive), which is what guarantees uniqueness.
inline SuiteResult verify_p_matrix_chain(std::uint64_t seed,
                                         int n_markets = 1000, int n_max = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(1, n_max);
  int counterexamples = 0;
  for (int k = 0; k < n_markets; ++k) {
    const Market market = sample_weak_market(rng, n_dist(rng));
    const Vec prices = sample_prices(rng, market);
    if (!market.weak_interference ||
        !is_p_matrix(assemble_lcp(market, prices).m)) {
      ++counterexamples;
    }
  }
  SuiteResult r;
  r.name = "p-matrix-chain";
  r.ok = counterexamples == 0;
  r.detail = detail::fmt("%d weak markets (n<=%d): %d counterexample(s)",
                         n_markets, n_max, counterexamples);
  return r;
}

// Closed-form provider equilibria vs numeric search on random two-AP weak
// markets with cross gains below 1: the duopoly closed form must match the
// best-response fixed point, total profit must be stationary at the
// discriminating-monopoly point (central finite differences), and no
// provider may gain more than 1e-8 from a unilateral 1e-3 price deviation
// at the closed-form duopoly point.
inline SuiteResult verify_equilibrium_consistency(std::uint64_t seed,
                                                  int n_markets = 200) {
  std::mt19937_64 rng(seed);
  const SearchOptions opts;
  int failures = 0;
  double max_de_dev = 0.0;
  double max_me_fd = 0.0;
  double max_gain = 0.0;
  for (int k = 0; k < n_markets; ++k) {
    const Market market = sample_two_ap_weak(rng);
    const double w = market.demand.w;

    const EquilibriumReport de = duopoly(market);
    const EquilibriumReport br =
        br_iterate(market, Vec::Constant(2, 0.5 * w), opts);
    const double de_dev = (de.prices - br.prices).lpNorm<Eigen::Infinity>();
    max_de_dev = std::max(max_de_dev, de_dev);

    const EquilibriumReport me = monopoly_pd(market);
    auto total_profit = [&](const Vec& p) {
      return p.dot(equilibrium_flows(market, p));
    };
    double me_fd = 0.0;  // largest |d(total profit)/d p_i|, scaled by w
    const double h = 1e-5 * w;
    for (int i = 0; i < 2; ++i) {
      Vec hi = me.prices, lo = me.prices;
      hi[i] += h;
      lo[i] -= h;
      me_fd = std::max(
          me_fd, std::abs(total_profit(hi) - total_profit(lo)) / (2.0 * h * w));
    }
    max_me_fd = std::max(max_me_fd, me_fd);

    double gain = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double base = de.prices[i] * de.flows[i];
      for (double step : {1e-3, -1e-3}) {
        Vec p = de.prices;
        p[i] = std::max(0.0, p[i] + step);
        gain = std::max(gain, p[i] * equilibrium_flows(market, p)[i] - base);
      }
    }
    max_gain = std::max(max_gain, gain);

    if (!(br.converged && de_dev <= 1e-5 && me_fd <= 1e-6 &&
          gain <= 1e-8)) {
      ++failures;
    }
  }
  SuiteResult r;
  r.name = "equilibrium-consistency";
  r.ok = failures == 0;
  r.detail = detail::fmt(
      "%d markets: %d failure(s), max duopoly dev %.3e, max monopoly profit "
      "gradient %.3e, max deviation gain %.3e",
      n_markets, failures, max_de_dev, max_me_fd, max_gain);
  return r;
}

// Efficiency-bound certification over a wide (s, a) grid, plus the limiting
// spot values: PoCS approaches its 3/4 floor as s grows, PoCP approaches its
// floor 1 as s and a vanish, and both ratios blow up toward a -> 1.
inline SuiteResult verify_efficiency_bounds() {
  std::vector<double> s_values;
  for (int k = -3; k <= 6; ++k) s_values.push_back(std::pow(10.0, k));
  std::vector<double> a_values;
  for (int i = 0; i <= 99; ++i) a_values.push_back(0.01 * i);

  SuiteResult r;
  r.name = "efficiency-bounds";
  try {
    const BoundsReport rep = verify_bounds(s_values, a_values);

    double max_dev_75 = 0.0;  // largest |PoCS - 3/4| along s = 1e6
    for (double a : a_values) {
      max_dev_75 = std::max(
          max_dev_75,
          std::abs(pocs(make_two_ap_market(1.0, 1e6, a, a)) - 0.75));
    }
    const double pocp_floor =
        pocp(make_two_ap_market(1.0, 1e-6, 1e-6, 1e-6));
    const double pocs_blowup = pocs(make_two_ap_market(1.0, 1e-3, 0.999, 0.999));
    const double pocp_blowup = pocp(make_two_ap_market(1.0, 1.0, 0.999, 0.999));

    r.ok = max_dev_75 <= 1e-3 && std::abs(pocp_floor - 1.0) <= 1e-3 &&
           pocs_blowup > 10.0 && pocp_blowup > 10.0;
    r.detail = detail::fmt(
        "%d grid points; min PoCS %.6f at (s=%g, a=%g), min PoCP %.6f at "
        "(s=%g, a=%g); |PoCS-3/4| at s=1e6 <= %.2e; PoCP floor %.6f; "
        "blow-ups %.1f / %.1f",
        rep.points, rep.min_pocs, rep.min_pocs_s, rep.min_pocs_a, rep.min_pocp,
        rep.min_pocp_s, rep.min_pocp_a, max_dev_75, pocp_floor, pocs_blowup,
        pocp_blowup);
  } catch (const BoundViolated& e) {
    r.ok = false;
    r.detail = e.what();
  }
  return r;
}

// PoCS as a function of the symmetric cross gain at s = 1 crosses 1 exactly
// once, inside [0.6, 0.8]: mild interference favors competition, strong
// interference favors consolidation.
inline SuiteResult verify_pocs_crossing(double step = 1e-3) {
  const double s = 1.0;
  int crossings = 0;
  double location = -1.0;
  double prev_a = 0.0;
  double prev_v = pocs(make_two_ap_market(1.0, s, 0.0, 0.0)) - 1.0;
  for (double a = step; a < 1.0; a += step) {
    const double v = pocs(make_two_ap_market(1.0, s, a, a)) - 1.0;
    if ((prev_v < 0.0 && v >= 0.0) || (prev_v >= 0.0 && v < 0.0)) {
      ++crossings;
      // Bisect the bracketing interval down to 1e-9.
      double lo = prev_a, hi = a, flo = prev_v;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const double fm = pocs(make_two_ap_market(1.0, s, mid, mid)) - 1.0;
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      location = 0.5 * (lo + hi);
    }
    prev_a = a;
    prev_v = v;
  }
  SuiteResult r;
  r.name = "pocs-crossing";
  r.ok = crossings == 1 && location >= 0.6 && location <= 0.8;
  r.detail = detail::fmt("%d crossing(s) of PoCS = 1 at s=1; location %.6f",
                         crossings, location);
  return r;
}

// Strong-coupling multiplicity: scan a fixed-price (a2, b1) grid for points
// with a2 + b1 > 2 where enumeration reports several user equilibria, and
// check every reported equilibrium is a crossing of the total-demand
// correspondence with the inverse demand line.
inline SuiteResult verify_multiplicity(double p1 = 0.1, double p2 = 0.6,
                                       double w = 1.0, double s = 1.0) {
  int multi_points = 0;
  int bad_crossings = 0;
  int max_count = 0;
  double at_a2 = 0.0, at_b1 = 0.0;
  for (int ia = 0; ia <= 40; ++ia) {
    for (int ib = 0; ib <= 24; ++ib) {
      const double a2 = 0.1 * ia;
      const double b1 = 0.05 * ib;
      if (!(a2 + b1 > 2.0)) continue;
      const Market market = make_two_ap_market(w, s, a2, b1);
      Vec prices(2);
      prices << p1, p2;
      const WardropResult we = wardrop_equilibrium(market, prices);
      const int count = static_cast<int>(we.all_equilibria.size());
      if (count < 2) continue;
      ++multi_points;
      if (count > max_count) {
        max_count = count;
        at_a2 = a2;
        at_b1 = b1;
      }
      for (const Vec& x : we.all_equilibria) {
        const double total = x.sum();
        if (!(total > 0.0)) continue;  // trivial split cannot occur: p1 < w
        const double d = market.demand.value(total);
        bool crossed = false;
        if (std::abs(a2 * b1 - 1.0) <= 1e-9) {
          // Degenerate coupling a2*b1 = 1: the two breakpoints coincide and
          // the both-AP family collapses to a vertical segment of admissible
          // totals at that single disutility.
          const double bx = detail::breakpoint_x2_on(b1, p1, p2);
          crossed = std::abs(d - bx) <= 1e-6 && total >= d - p2 - 1e-6 &&
                    total <= d - p1 + 1e-6;
        }
        if (!crossed) {
          for (double v : total_demand(a2, b1, p1, p2, d, w)) {
            if (std::abs(v - market.demand.inverse(d)) <= 1e-6) crossed = true;
          }
        }
        if (!crossed) ++bad_crossings;
      }
    }
  }
  SuiteResult r;
  r.name = "multiplicity";
  r.ok = multi_points >= 1 && bad_crossings == 0;
  r.detail = detail::fmt(
      "%d grid point(s) with several equilibria beyond a2+b1>2; up to %d "
      "equilibria at (a2=%.2f, b1=%.2f); %d crossing mismatch(es)",
      multi_points, max_count, at_a2, at_b1, bad_crossings);
  return r;
}

inline std::vector<SuiteResult> verify_all(std::uint64_t seed) {
  return {
      verify_lcp_oracle(seed),
      verify_p_matrix_chain(seed + 1),
      verify_equilibrium_consistency(seed + 2),
      verify_efficiency_bounds(),
      verify_pocs_crossing(),
      verify_multiplicity(),
  };
}

}  // namespace apgame
