#pragma once

// Welfare accounting and the two competition-efficiency ratios:
//
//   PoCS = SW(monopoly) / SW(duopoly)      -- social-welfare cost of merging
//   PoCP = profit(monopoly) / profit(duopoly)
//
// Both ratios are computed definitionally from the equilibria module.  For
// symmetric weak coupling (a2 = b1 = a < 1) closed forms exist:
//
//   PoCS = (3s+1+a)(s+2-a)^2 / [4(s+1)(s^2+3s+1-2as-a^2)]   >= 3/4
//   PoCP = (s-a+2)^2 / [4(1-a)(s+1)]                        >= 1
//
// and the definitional path cross-checks itself against them.  The lower
// bounds hold everywhere on the symmetric weak domain; verify_bounds sweeps a
// grid and certifies them, reporting the minima attained.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "apgame/equilibria.hpp"
#include "apgame/errors.hpp"
#include "apgame/market.hpp"

namespace apgame {

inline constexpr double kPocsLowerBound = 0.75;
inline constexpr double kPocpLowerBound = 1.0;
inline constexpr double kBoundSlack = 1e-9;          // bound check tolerance
inline constexpr double kClosedFormAgreeTol = 1e-8;  // scaled by max(1,|value|)

struct WelfareBreakdown {
  double gross_utility = 0.0;    // integral of u over [0, X] = wX - sX^2/2
  double congestion_cost = 0.0;  // sum_j x_j l_j(x) = x^T G^T x
  double social_welfare = 0.0;   // gross - congestion
  double consumer_surplus = 0.0; // sX^2/2; the integral form reduces to this
                                 // exactly when flows are an equilibrium
  double total_profit = 0.0;     // p . x
};

// Welfare at an arbitrary (prices, flows) operating point.  Note that
// social_welfare = consumer_surplus + total_profit only holds when `flows`
// is a user equilibrium at `prices`; for off-equilibrium inputs the fields
// are still individually meaningful but the identity fails.
inline WelfareBreakdown welfare(const Market& market, const Vec& prices,
                                const Vec& flows) {
  check_vector(market, prices, "prices");
  check_vector(market, flows, "flows");
  const double x_total = flows.sum();
  WelfareBreakdown out;
  out.gross_utility =
      market.demand.w * x_total - 0.5 * market.demand.s * x_total * x_total;
  out.congestion_cost = flows.dot(congestion(market, flows));
  out.social_welfare = out.gross_utility - out.congestion_cost;
  out.consumer_surplus = 0.5 * market.demand.s * x_total * x_total;
  out.total_profit = prices.dot(flows);
  return out;
}

// Symmetric-coupling closed forms (a = a2 = b1 < 1).
inline double pocs_closed_form(double s, double a) {
  const double num = (3.0 * s + 1.0 + a) * (s + 2.0 - a) * (s + 2.0 - a);
  const double den =
      4.0 * (s + 1.0) * (s * s + 3.0 * s + 1.0 - 2.0 * a * s - a * a);
  return num / den;
}

inline double pocp_closed_form(double s, double a) {
  return (s - a + 2.0) * (s - a + 2.0) / (4.0 * (1.0 - a) * (s + 1.0));
}

struct EfficiencyMetrics {
  double pocs = std::numeric_limits<double>::quiet_NaN();
  double pocp = std::numeric_limits<double>::quiet_NaN();
  bool symmetric_closed_form_used = false;
  WelfareBreakdown me;  // price-discriminating monopoly
  WelfareBreakdown de;  // duopoly
  std::string de_case;
};

// Definitional PoCS/PoCP via the closed-form equilibria (two weakly-coupled
// APs).  When the coupling is symmetric the result is cross-checked against
// the closed-form ratios; disagreement indicates an implementation bug and
// throws rather than returning silently-wrong numbers.
inline EfficiencyMetrics efficiency(const Market& market) {
  const EquilibriumReport me = monopoly_pd(market);
  const EquilibriumReport de = duopoly(market);
  EfficiencyMetrics out;
  out.me = welfare(market, me.prices, me.flows);
  out.de = welfare(market, de.prices, de.flows);
  out.de_case = de.case_tag;
  if (!(out.de.social_welfare > 0.0)) {
    throw DegenerateDuopoly("duopoly social welfare is not positive (" +
                            std::to_string(out.de.social_welfare) + ")");
  }
  if (!(out.de.total_profit > 0.0)) {
    throw DegenerateDuopoly("duopoly total profit is not positive (" +
                            std::to_string(out.de.total_profit) + ")");
  }
  out.pocs = out.me.social_welfare / out.de.social_welfare;
  out.pocp = out.me.total_profit / out.de.total_profit;

  const double a2 = market.gains.a2();
  const double b1 = market.gains.b1();
  if (std::abs(a2 - b1) <= 1e-12 && a2 < 1.0) {
    out.symmetric_closed_form_used = true;
    const double s = market.demand.s;
    const double cs = pocs_closed_form(s, a2);
    const double cp = pocp_closed_form(s, a2);
    const double tol_s = kClosedFormAgreeTol * std::max(1.0, std::abs(cs));
    const double tol_p = kClosedFormAgreeTol * std::max(1.0, std::abs(cp));
    if (!(std::abs(out.pocs - cs) <= tol_s) ||
        !(std::abs(out.pocp - cp) <= tol_p)) {
      throw SolveFailure(
          "symmetric closed-form cross-check failed: pocs " +
          std::to_string(out.pocs) + " vs " + std::to_string(cs) +
          ", pocp " + std::to_string(out.pocp) + " vs " + std::to_string(cp));
    }
  }
  return out;
}

inline double pocs(const Market& market) { return efficiency(market).pocs; }
inline double pocp(const Market& market) { return efficiency(market).pocp; }

struct BoundsReport {
  int points = 0;
  double min_pocs = std::numeric_limits<double>::infinity();
  double min_pocs_s = 0.0;
  double min_pocs_a = 0.0;
  double min_pocp = std::numeric_limits<double>::infinity();
  double min_pocp_s = 0.0;
  double min_pocp_a = 0.0;
};

// Certify PoCS >= 3/4 and PoCP >= 1 on a (s, a) grid of symmetric markets,
// a = a2 = b1.  A violation is an implementation bug (the bounds are
// theorems on this domain), so it throws rather than being reported softly.
inline BoundsReport verify_bounds(const std::vector<double>& s_values,
                                  const std::vector<double>& a_values,
                                  double w = 1.0) {
  if (s_values.empty() || a_values.empty()) {
    throw InvalidArgument("verify_bounds needs non-empty grids");
  }
  for (double s : s_values) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw InvalidArgument("verify_bounds: s must be finite and positive");
    }
  }
  for (double a : a_values) {
    if (!std::isfinite(a) || a < 0.0 || a >= 1.0) {
      throw InvalidArgument("verify_bounds: a must lie in [0, 1)");
    }
  }
  BoundsReport rep;
  for (double s : s_values) {
    for (double a : a_values) {
      const Market market = make_two_ap_market(w, s, a, a);
      const EfficiencyMetrics em = efficiency(market);
      ++rep.points;
      if (em.pocs < rep.min_pocs) {
        rep.min_pocs = em.pocs;
        rep.min_pocs_s = s;
        rep.min_pocs_a = a;
      }
      if (em.pocp < rep.min_pocp) {
        rep.min_pocp = em.pocp;
        rep.min_pocp_s = s;
        rep.min_pocp_a = a;
      }
      if (em.pocs < kPocsLowerBound - kBoundSlack) {
        throw BoundViolated("PoCS = " + std::to_string(em.pocs) +
                            " < 3/4 at s=" + std::to_string(s) +
                            ", a=" + std::to_string(a));
      }
      if (em.pocp < kPocpLowerBound - kBoundSlack) {
        throw BoundViolated("PoCP = " + std::to_string(em.pocp) +
                            " < 1 at s=" + std::to_string(s) +
                            ", a=" + std::to_string(a));
      }
    }
  }
  return rep;
}

}  // namespace apgame
