#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <apgame/samplers.hpp>
#include <apgame/wardrop.hpp>

#include "helpers.hpp"

using apgame::FineRegion;
using apgame::Mat;
using apgame::Vec;
using Catch::Approx;

namespace {

Vec prices2(double p1, double p2) {
  Vec p(2);
  p << p1, p2;
  return p;
}

// Every reported flow split must satisfy the user-equilibrium conditions:
// active APs sit exactly at the market disutility, inactive APs at or above.
void require_equilibrium(const apgame::Market& m, const Vec& p, const Vec& x,
                         double tol = apgame::kTauWe) {
  const double d = m.demand.value(x.sum());
  const Vec cost = apgame::disutility(m, p, x);
  for (int i = 0; i < m.n(); ++i) {
    if (x[i] > 1e-10) {
      REQUIRE(std::abs(cost[i] - d) <= tol);
    } else {
      REQUIRE(cost[i] >= d - tol);
    }
  }
}

}  // namespace

TEST_CASE("user equilibrium: interior, one-sided and empty splits") {
  SECTION("symmetric interior split") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.0, 0.0);
    const apgame::WardropResult we =
        apgame::wardrop_equilibrium(m, prices2(0.2, 0.2));
    CHECK(we.unique);
    CHECK(we.flows[0] == Approx(0.8 / 3.0).margin(1e-10));
    CHECK(we.flows[1] == Approx(0.8 / 3.0).margin(1e-10));
    REQUIRE(we.disutility.has_value());
    CHECK(*we.disutility == Approx(1.0 - 1.6 / 3.0).margin(1e-10));
    require_equilibrium(m, prices2(0.2, 0.2), we.flows);
  }
  SECTION("both prices above the choke point") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.2, 0.3);
    const apgame::WardropResult we =
        apgame::wardrop_equilibrium(m, prices2(1.5, 1.5));
    CHECK(we.flows.cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(we.disutility.has_value());
    CHECK(we.unique);
  }
  SECTION("expensive AP is priced out") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.0, 0.0);
    const apgame::WardropResult we =
        apgame::wardrop_equilibrium(m, prices2(0.2, 0.9));
    CHECK(we.flows[0] == Approx(0.4).margin(1e-10));
    CHECK(we.flows[1] == 0.0);
    REQUIRE(we.disutility.has_value());
    CHECK(*we.disutility == Approx(0.6).margin(1e-10));
  }
  SECTION("asymmetric gains keep both flows positive at equal prices") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.4, 0.3);
    const apgame::WardropResult we = apgame::wardrop_equilibrium(
        m, prices2(1.0 / 3.0, 1.0 / 3.0));
    CHECK(we.flows.minCoeff() > 0.0);
    require_equilibrium(m, prices2(1.0 / 3.0, 1.0 / 3.0), we.flows);
  }
}

TEST_CASE("equilibrium conditions hold on random markets, weak and strong") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const bool strong = k % 3 == 0;
    const apgame::Market m =
        strong ? apgame::make_two_ap_market(1.0, 0.2 + 1.8 * unit(rng),
                                            4.0 * unit(rng), 1.5 * unit(rng))
               : apgame::sample_two_ap_weak(rng);
    const Vec p = apgame::sample_prices(rng, m);
    const apgame::WardropResult we = apgame::wardrop_equilibrium(m, p);
    REQUIRE_FALSE(we.all_equilibria.empty());
    for (const Vec& x : we.all_equilibria) {
      require_equilibrium(m, p, x);
    }
    // The lean two-AP route must agree with the general one.
    const Vec lean = apgame::equilibrium_flows(m, p);
    CHECK((lean - we.flows).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("equilibrium counting") {
  SECTION("weak coupling means a unique equilibrium at any prices") {
    std::mt19937_64 rng(102);
    for (int k = 0; k < 100; ++k) {
      const apgame::Market m = apgame::sample_two_ap_weak(rng);
      const Vec p = apgame::sample_prices(rng, m);
      CHECK(apgame::count_equilibria(m, p) == 1);
    }
  }
  SECTION("hand-checked strong-coupling multiplicity") {
    const apgame::Market m1 = apgame::make_two_ap_market(1.0, 1.0, 3.6, 0.2);
    CHECK(apgame::count_equilibria(m1, prices2(0.1, 0.6)) == 3);
    const apgame::Market m2 = apgame::make_two_ap_market(1.0, 1.0, 3.6, 0.5);
    CHECK(apgame::count_equilibria(m2, prices2(0.1, 0.6)) == 3);
    const apgame::WardropResult we =
        apgame::wardrop_equilibrium(m1, prices2(0.1, 0.6));
    CHECK_FALSE(we.unique);
    CHECK(we.all_equilibria.size() == 3);
  }
  SECTION("prices at the choke point leave only the empty split") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 3.0, 0.5);
    CHECK(apgame::count_equilibria(m, prices2(1.0, 1.0)) == 1);
  }
}

TEST_CASE("raising an AP's price never raises its own equilibrium flow") {
  const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.5, 0.3);
  double prev = std::numeric_limits<double>::infinity();
  for (double p1 = 0.0; p1 <= 1.0; p1 += 0.05) {
    const double x1 = apgame::equilibrium_flows(m, prices2(p1, 0.4))[0];
    CHECK(x1 <= prev + 1e-12);
    prev = x1;
  }
}

TEST_CASE("coarse classification at a fixed disutility") {
  using apgame::CoarseRegion;
  // d = 0.5 with prices (0.2, 0.4): price-out thresholds are a2 >= 3 for
  // AP 1 (0.4*... vs d - p1 = 0.3 over d - p2 = 0.1) and b1 >= 1/3 for AP 2.
  CHECK(apgame::classify_coarse(0.4, 0.2, 0.2, 0.4, 0.5) == CoarseRegion::I);
  CHECK(apgame::classify_coarse(4.0, 0.2, 0.2, 0.4, 0.5) == CoarseRegion::II);
  CHECK(apgame::classify_coarse(4.0, 0.5, 0.2, 0.4, 0.5) == CoarseRegion::III);
  CHECK(apgame::classify_coarse(0.4, 0.5, 0.2, 0.4, 0.5) == CoarseRegion::IV);
  CHECK_THROWS_AS(apgame::classify_coarse(0.4, 0.2, 0.2, 0.4, 0.3),
                  apgame::InvalidArgument);
}

TEST_CASE("fine classification of the demand-curve shape") {
  CHECK(apgame::classify_region(0.4, 0.2, 0.2, 0.4, 1.0) == FineRegion::a);
  CHECK(apgame::classify_region(2.0, 0.1, 0.2, 0.4, 1.0) == FineRegion::b);
  // Both thresholds exceeded: a2 = 2 >= 4/3 and b1 = 0.9 > 0.75.  The
  // product a2*b1 > 1 alone does not make this the single-crossing shape;
  // threshold dominance wins and the curve is the multi-valued fan.
  CHECK(apgame::classify_region(2.0, 0.9, 0.2, 0.4, 1.0) == FineRegion::d);
  CHECK(apgame::classify_region(2.0, 0.6, 0.2, 0.4, 1.0) == FineRegion::c);
  CHECK(apgame::classify_region(0.4, 0.9, 0.2, 0.4, 1.0) == FineRegion::e);
  CHECK(apgame::classify_region(3.6, 0.2, 0.1, 0.6, 1.0) == FineRegion::b);
  CHECK(apgame::classify_region(3.6, 0.5, 0.1, 0.6, 1.0) == FineRegion::d);
  CHECK(apgame::to_string(FineRegion::d) == std::string("d"));
  CHECK_THROWS_AS(apgame::classify_region(0.4, 0.2, 0.5, 0.4, 1.0),
                  apgame::BadPriceOrder);
}

TEST_CASE("demand branches: slopes, monotonicity and tiling") {
  SECTION("independent APs give two increasing branches, slopes 1 and 2") {
    const std::vector<apgame::DemandBranch> bs =
        apgame::demand_branches(0.0, 0.0, 0.2, 0.4, 1.0);
    REQUIRE(bs.size() == 2);
    CHECK(bs[0].exprs.size() == 1);
    CHECK(bs[0].exprs[0].slope == Approx(1.0));
    CHECK(bs[1].exprs[0].slope == Approx(2.0));
    CHECK(bs[0].increasing);
    CHECK(bs[1].increasing);
    CHECK(bs[0].lo == Approx(0.2));
    CHECK(bs[0].hi == Approx(0.4));   // the cheap AP alone up to p2
    CHECK(bs[1].hi == Approx(1.0));
  }
  SECTION("strong one-way coupling makes the middle branch decrease") {
    // a2 + b1 > 2 with a2*b1 < 1: more users can be served at a *higher*
    // disutility on the middle branch.
    const std::vector<apgame::DemandBranch> bs =
        apgame::demand_branches(1.5, 0.6, 0.2, 0.4, 1.0);
    REQUIRE(bs.size() == 3);
    CHECK(bs[1].exprs.size() == 1);
    CHECK(bs[1].exprs[0].support == apgame::FlowSupport::both);
    CHECK(bs[1].exprs[0].slope == Approx(-1.0));
    CHECK_FALSE(bs[1].increasing);
    CHECK(bs[0].hi == Approx(0.7));  // (p2 - b1 p1)/(1 - b1)
    CHECK(bs[1].hi == Approx(0.8));  // (p1 - a2 p2)/(1 - a2)
  }
  SECTION("mild symmetric coupling keeps every branch increasing") {
    for (const apgame::DemandBranch& b :
         apgame::demand_branches(0.3, 0.3, 0.2, 0.4, 1.0)) {
      CHECK(b.increasing);
    }
  }
  SECTION("branch intervals tile (p1, u0) with no gaps or overlaps") {
    std::mt19937_64 rng(103);
    for (int k = 0; k < 300; ++k) {
      const apgame::TwoApScenario sc = apgame::sample_two_ap_scenario(rng, 1.0);
      const std::vector<apgame::DemandBranch> bs =
          apgame::demand_branches(sc.a2, sc.b1, sc.p1, sc.p2, 1.0);
      REQUIRE_FALSE(bs.empty());
      CHECK(bs.front().lo == Approx(sc.p1));
      CHECK_FALSE(bs.front().lo_incl);
      CHECK(bs.back().hi == Approx(1.0));
      CHECK_FALSE(bs.back().hi_incl);
      for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
        CHECK(bs[i].hi == Approx(bs[i + 1].lo).margin(1e-12));
        CHECK(bs[i].hi_incl != bs[i + 1].lo_incl);
      }
    }
  }
}

TEST_CASE("total demand values") {
  SECTION("below the cheap price nobody enters") {
    const std::vector<double> v =
        apgame::total_demand(0.4, 0.2, 0.2, 0.4, 0.1, 1.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 0.0);
  }
  SECTION("between the prices only the cheap AP serves") {
    const std::vector<double> v =
        apgame::total_demand(0.4, 0.2, 0.2, 0.4, 0.35, 1.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Approx(0.15).margin(1e-12));
  }
  SECTION("independent APs: the interior branch doubles the slope") {
    const std::vector<double> v =
        apgame::total_demand(0.0, 0.0, 0.2, 0.4, 0.5, 1.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Approx(0.4).margin(1e-12));
  }
  SECTION("multi-valued fan admits three splits at one disutility") {
    const std::vector<double> v =
        apgame::total_demand(2.0, 0.6, 0.2, 0.4, 0.65, 1.0);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == Approx(0.25).margin(1e-12));  // expensive AP alone
    CHECK(v[1] == Approx(0.35).margin(1e-12));  // both APs
    CHECK(v[2] == Approx(0.45).margin(1e-12));  // cheap AP alone
  }
  SECTION("domain validation") {
    CHECK_THROWS_AS(apgame::total_demand(0.4, 0.2, 0.2, 0.4, 1.0, 1.0),
                    apgame::InvalidArgument);
    CHECK_THROWS_AS(apgame::total_demand(0.4, 0.2, 0.2, 0.4, 0.0, 1.0),
                    apgame::InvalidArgument);
    CHECK_THROWS_AS(apgame::total_demand(0.4, 0.2, 0.5, 0.4, 0.6, 1.0),
                    apgame::BadPriceOrder);
  }
}

TEST_CASE("total demand matches independent support-pattern enumeration") {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    const apgame::TwoApScenario sc = apgame::sample_two_ap_scenario(rng, 1.0);
    if (std::abs(1.0 - sc.a2 * sc.b1) < 5e-4) continue;  // collapsed fan
    const double bx2 = (1.0 - sc.b1) != 0.0
                           ? (sc.p2 - sc.b1 * sc.p1) / (1.0 - sc.b1)
                           : std::numeric_limits<double>::infinity();
    const double bx1 = (1.0 - sc.a2) != 0.0
                           ? (sc.p1 - sc.a2 * sc.p2) / (1.0 - sc.a2)
                           : std::numeric_limits<double>::infinity();
    for (int j = 0; j < 8; ++j) {
      const double d = 1e-3 + (1.0 - 2e-3) * unit(rng);
      if (std::abs(d - sc.p1) < 1e-6 || std::abs(d - sc.p2) < 1e-6) continue;
      if (std::isfinite(bx2) && std::abs(d - bx2) < 1e-6) continue;
      if (std::isfinite(bx1) && std::abs(d - bx1) < 1e-6) continue;
      const std::vector<double> lib =
          apgame::total_demand(sc.a2, sc.b1, sc.p1, sc.p2, d, 1.0);
      const std::vector<double> pat =
          oracle::pattern_totals(sc.a2, sc.b1, sc.p1, sc.p2, d);
      CHECK(oracle::subset_within(lib, pat, 1e-8));
      CHECK(oracle::subset_within(pat, lib, 1e-8));
      ++checked;
    }
  }
  CHECK(checked > 2000);
}

TEST_CASE("analytic crossings agree with the complementarity enumeration") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const apgame::TwoApScenario sc = apgame::sample_two_ap_scenario(rng, 1.0);
    if (std::abs(1.0 - sc.a2 * sc.b1) < 5e-4) continue;
    const apgame::Market m = apgame::make_two_ap_market(
        1.0, 0.3 + 1.7 * unit(rng), sc.a2, sc.b1);
    // Exercise the label-swap path half the time.
    const Vec p = k % 2 == 0 ? prices2(sc.p1, sc.p2) : prices2(sc.p2, sc.p1);

    std::vector<double> lcp_totals;
    for (const Vec& x :
         apgame::wardrop_equilibrium(m, p).all_equilibria) {
      if (x.sum() > 0.0) lcp_totals.push_back(x.sum());
    }
    std::sort(lcp_totals.begin(), lcp_totals.end());

    std::vector<double> crossing_totals;
    for (const apgame::DemandCrossing& c : apgame::demand_crossings(m, p)) {
      if (c.total > 0.0) crossing_totals.push_back(c.total);
      require_equilibrium(m, p, Vec(c.flows), 1e-7);
    }
    std::sort(crossing_totals.begin(), crossing_totals.end());

    REQUIRE(crossing_totals.size() == lcp_totals.size());
    for (std::size_t i = 0; i < lcp_totals.size(); ++i) {
      CHECK(crossing_totals[i] == Approx(lcp_totals[i]).margin(1e-7));
    }
  }
}

TEST_CASE("region/support consistency at the equilibrium") {
  SECTION("single-crossing region serves both APs at interior prices") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.4, 0.2);
    REQUIRE(apgame::classify_region(0.4, 0.2, 0.2, 0.4, 1.0) == FineRegion::a);
    const Vec x = apgame::equilibrium_flows(m, prices2(0.2, 0.4));
    CHECK(x.minCoeff() > 0.0);
  }
  SECTION("one-sided region never serves the expensive AP") {
    REQUIRE(apgame::classify_region(0.4, 0.9, 0.2, 0.4, 1.0) == FineRegion::e);
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.4, 0.9);
    for (const Vec& x :
         apgame::wardrop_equilibrium(m, prices2(0.2, 0.4)).all_equilibria) {
      CHECK(x[1] == 0.0);
    }
  }
}

TEST_CASE("junction values are one-sided limits of the correspondence") {
  // At a junction the set can be multi-valued (a single-AP pattern from the
  // adjacent branch stays admissible with its leave-out condition tight), so
  // each value must be approached from at least one side -- not from both.
  std::mt19937_64 rng(106);
  const double eps = 1e-10;
  int junctions = 0;
  for (int k = 0; k < 300; ++k) {
    const apgame::TwoApScenario sc = apgame::sample_two_ap_scenario(rng, 1.0);
    if (std::abs(1.0 - sc.a2 * sc.b1) < 5e-4) continue;
    const std::vector<apgame::DemandBranch> bs =
        apgame::demand_branches(sc.a2, sc.b1, sc.p1, sc.p2, 1.0);
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
      const double b = bs[i].hi;
      if (b - eps <= sc.p1 || b + eps >= 1.0) continue;
      const std::vector<double> at =
          apgame::total_demand(sc.a2, sc.b1, sc.p1, sc.p2, b, 1.0);
      std::vector<double> sides =
          apgame::total_demand(sc.a2, sc.b1, sc.p1, sc.p2, b - eps, 1.0);
      for (double v :
           apgame::total_demand(sc.a2, sc.b1, sc.p1, sc.p2, b + eps, 1.0)) {
        sides.push_back(v);
      }
      CHECK(oracle::subset_within(at, sides, 1e-6));
      ++junctions;
    }
  }
  CHECK(junctions > 200);
}
