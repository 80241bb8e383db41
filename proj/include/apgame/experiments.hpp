#pragma once

// Config-driven parameter sweeps.  Every function takes a parsed SweepConfig
// and returns a Table ready for emit_csv / emit_plotdata; rows are generated
// in sweep order and all numbers go through csv_num, so identical configs
// produce byte-identical files.
//
// run_fig4: two-AP price/flow/profit comparison of monopoly vs duopoly as
//           the cross gain a2 sweeps through weak and strong coupling.
// run_fig5: symmetric-coupling efficiency ratios (PoCS, PoCP) for
//           s in {0.1, 1, 10}.
// run_regions: fixed-price (a2, b1) grid with fine region labels and
//           equilibrium counts.
// run_metrics_sweep: welfare/efficiency columns along one swept variable.
// fd_curve_table: sampled total-demand correspondence f(d) at the base
//           market's cross gains and the configured fixed prices.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "apgame/config.hpp"
#include "apgame/csv.hpp"
#include "apgame/equilibria.hpp"
#include "apgame/errors.hpp"
#include "apgame/market.hpp"
#include "apgame/metrics.hpp"
#include "apgame/wardrop.hpp"

namespace apgame {

// Closed form when its hypotheses hold (two APs, weak interference),
// numeric search otherwise; the report's case_tag records the route.
inline EquilibriumReport monopoly_pd_auto(const Market& m,
                                          const SearchOptions& opts = {}) {
  if (m.n() == 2 && m.weak_interference) return monopoly_pd(m);
  return monopoly_pd_numeric(m, opts);
}

inline EquilibriumReport monopoly_uniform_auto(const Market& m,
                                               const SearchOptions& opts = {}) {
  if (m.n() == 2 && m.weak_interference) return monopoly_uniform(m);
  return monopoly_uniform_numeric(m, opts);
}

inline EquilibriumReport duopoly_auto(const Market& m,
                                      const SearchOptions& opts = {}) {
  if (m.n() == 2 && m.weak_interference) return duopoly(m);
  EquilibriumReport rep =
      br_iterate(m, Vec::Constant(m.n(), 0.5 * m.demand.w), opts);
  if (!rep.converged) rep.case_tag += "-unconverged";
  return rep;
}

namespace detail {

inline const char* support_name(FlowSupport s) {
  switch (s) {
    case FlowSupport::none: return "none";
    case FlowSupport::ap1_only: return "ap1";
    case FlowSupport::ap2_only: return "ap2";
    default: return "both";
  }
}

}  // namespace detail

// Monopoly-vs-duopoly sweep over a2 at fixed b1 (from the base gains).
// Strong-coupling rows (a2 + b1 >= 2) switch to the numeric solvers; the
// `method` column records which route produced the monopoly columns.
inline Table run_fig4(const SweepConfig& cfg) {
  if (cfg.sweep != SweepVar::a2) {
    throw ValidationError("this sweep varies a2; set sweep: a2");
  }
  Table t;
  t.columns = {"a2",       "p1_me",    "p2_me",    "p1_de",    "p2_de",
               "x1_me",    "x2_me",    "x1_de",    "x2_de",    "prof1_me",
               "prof2_me", "prof1_de", "prof2_de", "de_case_tag",
               "p1_me_uniform",    "p2_me_uniform",    "x1_me_uniform",
               "x2_me_uniform",    "prof1_me_uniform", "prof2_me_uniform",
               "method"};
  for (double a2 : sweep_values(cfg)) {
    const Market m = market_with(cfg, a2);
    const EquilibriumReport me = monopoly_pd_auto(m);
    const EquilibriumReport meu = monopoly_uniform_auto(m);
    const EquilibriumReport de = duopoly_auto(m);
    std::string method = me.case_tag;
    if (!me.converged) method += "-unconverged";
    t.rows.push_back({csv_num(a2),
                      csv_num(me.prices[0]), csv_num(me.prices[1]),
                      csv_num(de.prices[0]), csv_num(de.prices[1]),
                      csv_num(me.flows[0]), csv_num(me.flows[1]),
                      csv_num(de.flows[0]), csv_num(de.flows[1]),
                      csv_num(me.profits[0]), csv_num(me.profits[1]),
                      csv_num(de.profits[0]), csv_num(de.profits[1]),
                      de.case_tag,
                      csv_num(meu.prices[0]), csv_num(meu.prices[1]),
                      csv_num(meu.flows[0]), csv_num(meu.flows[1]),
                      csv_num(meu.profits[0]), csv_num(meu.profits[1]),
                      method});
  }
  return t;
}

// Symmetric-coupling efficiency sweep: a2 = b1 = a over the configured
// range, for s in {0.1, 1, 10}.  Rows whose hypotheses fail (a2 + b1 >= 2,
// or a degenerate duopoly) are kept with NaN metrics and a status flag.
inline Table run_fig5(const SweepConfig& cfg) {
  if (cfg.sweep != SweepVar::a2) {
    throw ValidationError("this sweep varies the symmetric gain; set sweep: a2");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  Table t;
  t.columns = {"s", "a2", "pocs", "pocp", "status"};
  for (double s : {0.1, 1.0, 10.0}) {
    for (double a : sweep_values(cfg)) {
      double v_pocs = kNaN, v_pocp = kNaN;
      std::string status = "ok";
      try {
        const EfficiencyMetrics em =
            efficiency(make_two_ap_market(cfg.w, s, a, a));
        v_pocs = em.pocs;
        v_pocp = em.pocp;
      } catch (const HypothesisViolated&) {
        status = "hypothesis-violated";
      } catch (const DegenerateDuopoly&) {
        status = "degenerate-duopoly";
      } catch (const NumericError&) {
        status = "solver-failure";
      }
      t.rows.push_back({csv_num(s), csv_num(a), csv_num(v_pocs),
                        csv_num(v_pocp), status});
    }
  }
  return t;
}

// Fixed-price region map: fine region label and number of user equilibria on
// an (a2, b1) grid.  a2 runs over the main sweep, b1 over the secondary grid.
inline Table run_regions(const SweepConfig& cfg) {
  if (cfg.sweep != SweepVar::a2) {
    throw ValidationError("the region grid sweeps a2; set sweep: a2");
  }
  if (!(cfg.p1 < cfg.p2 && cfg.p2 < cfg.w)) {
    throw ValidationError("the region grid needs fixed prices p1 < p2 < w");
  }
  Vec prices(2);
  prices << cfg.p1, cfg.p2;
  Table t;
  t.columns = {"a2", "b1", "fine_region", "n_equilibria"};
  for (double a2 : sweep_values(cfg)) {
    for (double b1 : sweep_values(cfg.b1_from, cfg.b1_to, cfg.b1_step)) {
      const FineRegion region =
          classify_region(a2, b1, cfg.p1, cfg.p2, cfg.w);
      const Market m = make_two_ap_market(cfg.w, cfg.s, a2, b1);
      const int count = count_equilibria(m, prices);
      t.rows.push_back({csv_num(a2), csv_num(b1), to_string(region),
                        std::to_string(count)});
    }
  }
  return t;
}

// Welfare and efficiency columns along one swept variable (a2, b1 or s).
// Strong-coupling rows require allow_strong and use the numeric equilibria;
// rows whose duopoly degenerates are kept with NaN metrics.
inline Table run_metrics_sweep(const SweepConfig& cfg) {
  if (cfg.gains.rows() != 2) {
    throw ValidationError("the metrics sweep needs a 2-AP market");
  }
  if (cfg.sweep == SweepVar::p1 || cfg.sweep == SweepVar::p2) {
    throw ValidationError(
        "the metrics sweep varies a2, b1 or s; prices are equilibrium "
        "outputs here");
  }
  if (!cfg.allow_strong) {
    const double worst =
        cfg.sweep == SweepVar::a2   ? cfg.to + cfg.gains(0, 1)
        : cfg.sweep == SweepVar::b1 ? cfg.gains(1, 0) + cfg.to
                                    : cfg.gains(1, 0) + cfg.gains(0, 1);
    if (!(worst < 2.0)) {
      throw ValidationError(
          "sweep reaches a2 + b1 >= 2; set allow_strong: true to use the "
          "numeric fallbacks");
    }
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  Table t;
  t.columns = {"s",     "a2",    "b1",        "pocs",      "pocp",
               "sw_me", "sw_de", "profit_me", "profit_de"};
  for (double v : sweep_values(cfg)) {
    const Market m = market_with(cfg, v);
    double pocs_v = kNaN, pocp_v = kNaN, sw_me = kNaN, sw_de = kNaN,
           prof_me = kNaN, prof_de = kNaN;
    try {
      if (m.weak_interference) {
        const EfficiencyMetrics em = efficiency(m);
        pocs_v = em.pocs;
        pocp_v = em.pocp;
        sw_me = em.me.social_welfare;
        sw_de = em.de.social_welfare;
        prof_me = em.me.total_profit;
        prof_de = em.de.total_profit;
      } else {
        const EquilibriumReport me = monopoly_pd_auto(m);
        const EquilibriumReport de = duopoly_auto(m);
        const WelfareBreakdown wme = welfare(m, me.prices, me.flows);
        const WelfareBreakdown wde = welfare(m, de.prices, de.flows);
        sw_me = wme.social_welfare;
        sw_de = wde.social_welfare;
        prof_me = wme.total_profit;
        prof_de = wde.total_profit;
        if (wde.social_welfare > 0.0) pocs_v = sw_me / sw_de;
        if (wde.total_profit > 0.0) pocp_v = prof_me / prof_de;
      }
    } catch (const NumericError&) {
      // keep the NaN row: the sweep stays rectangular and deterministic
    } catch (const HypothesisViolated&) {
    }
    t.rows.push_back({csv_num(m.demand.s), csv_num(m.gains.a2()),
                      csv_num(m.gains.b1()), csv_num(pocs_v), csv_num(pocp_v),
                      csv_num(sw_me), csv_num(sw_de), csv_num(prof_me),
                      csv_num(prof_de)});
  }
  return t;
}

// Sampled total-demand correspondence f(d) at the base market's (a2, b1) and
// the configured fixed prices: one row per admitted expression per sample.
inline Table fd_curve_table(const SweepConfig& cfg, int samples_per_branch = 64) {
  if (cfg.gains.rows() != 2) {
    throw ValidationError("the demand-curve table needs a 2-AP market");
  }
  if (!(cfg.p1 < cfg.p2 && cfg.p2 < cfg.w)) {
    throw ValidationError("the demand-curve table needs prices p1 < p2 < w");
  }
  const double a2 = cfg.gains(1, 0);
  const double b1 = cfg.gains(0, 1);
  Table t;
  t.columns = {"d", "branch", "support", "total", "x1", "x2"};
  const std::vector<DemandBranch> branches =
      demand_branches(a2, b1, cfg.p1, cfg.p2, cfg.w);
  for (std::size_t bi = 0; bi < branches.size(); ++bi) {
    const DemandBranch& b = branches[bi];
    for (int k = 0; k < samples_per_branch; ++k) {
      const double d =
          b.lo + (b.hi - b.lo) * k / std::max(1, samples_per_branch - 1);
      if (!b.contains(d)) continue;  // open endpoints
      for (const DemandExpr& e : b.exprs) {
        const Eigen::Vector2d x = e.flows(d);
        t.rows.push_back({csv_num(d), std::to_string(bi),
                          detail::support_name(e.support),
                          csv_num(e.total(d)), csv_num(x[0]), csv_num(x[1])});
      }
    }
  }
  return t;
}

// Canonical sweep configurations; the CLI uses these when no --config file
// is given, and they double as schema examples.
inline std::string default_fig4_config() {
  return "gains: [[1, 0.3], [0, 1]]\n"
         "sweep: a2\n"
         "from: 0\n"
         "to: 1.7\n"
         "step: 0.02\n";
}

inline std::string default_fig5_config() {
  return "sweep: a2\n"
         "from: 0\n"
         "to: 1\n"
         "step: 0.01\n";
}

inline std::string default_regions_config() {
  return "sweep: a2\n"
         "from: 0\n"
         "to: 4\n"
         "step: 0.1\n"
         "b1_from: 0\n"
         "b1_to: 1.2\n"
         "b1_step: 0.05\n"
         "p1: 0.1\n"
         "p2: 0.6\n";
}

inline std::string default_metrics_config() {
  return "gains: [[1, 0.3], [0, 1]]\n"
         "sweep: a2\n"
         "from: 0\n"
         "to: 0.95\n"
         "step: 0.01\n";
}

}  // namespace apgame
