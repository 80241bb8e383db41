#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <apgame/lcp.hpp>
#include <apgame/samplers.hpp>

using apgame::Mat;
using apgame::Vec;
using Catch::Approx;

namespace {

apgame::LcpInstance instance(std::initializer_list<double> m,
                             std::initializer_list<double> q) {
  apgame::LcpInstance lcp;
  const int n = static_cast<int>(q.size());
  lcp.m = Mat(n, n);
  int k = 0;
  for (double v : m) lcp.m(k / n, k % n) = v, ++k;
  lcp.q = Vec(n);
  k = 0;
  for (double v : q) lcp.q[k++] = v;
  return lcp;
}

}  // namespace

TEST_CASE("assembly: M adds the slope to the transposed gains, q = p - w") {
  SECTION("identity interference") {
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.0, 0.0);
    Vec p(2);
    p << 0.2, 0.2;
    const apgame::LcpInstance lcp = apgame::assemble_lcp(m, p);
    CHECK(lcp.m(0, 0) == 2.0);
    CHECK(lcp.m(0, 1) == 1.0);
    CHECK(lcp.m(1, 0) == 1.0);
    CHECK(lcp.m(1, 1) == 2.0);
    CHECK(lcp.q[0] == Approx(-0.8).margin(1e-15));
    CHECK(lcp.q[1] == Approx(-0.8).margin(1e-15));
  }
  SECTION("the cross gains land transposed") {
    // a2 = g(2->1) couples AP 2's flow into AP 1's row of M.
    const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 0.4, 0.3);
    Vec p(2);
    p << 0.5, 0.5;
    const apgame::LcpInstance lcp = apgame::assemble_lcp(m, p);
    CHECK(lcp.m(0, 1) == Approx(1.4).margin(1e-15));
    CHECK(lcp.m(1, 0) == Approx(1.3).margin(1e-15));
  }
  SECTION("prices above the choke point give q >= 0") {
    const apgame::Market m = apgame::make_two_ap_market(2.0, 0.5, 0.0, 0.0);
    Vec p(2);
    p << 3.0, 3.0;
    const apgame::LcpInstance lcp = apgame::assemble_lcp(m, p);
    CHECK(lcp.q[0] == 1.0);
    CHECK(lcp.q[1] == 1.0);
    const apgame::LcpEnumeration all = apgame::solve_lcp_enumerate(lcp);
    REQUIRE(all.solutions.size() == 1);
    CHECK(all.solutions.front().x.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("P-matrix test checks every principal minor") {
  Mat a(2, 2);
  a << 2, 1, 1, 2;
  CHECK(apgame::is_p_matrix(a));
  Mat b(2, 2);
  b << 1, 3, 0.1, 1;  // asymmetric but det = 0.7 > 0
  CHECK(apgame::is_p_matrix(b));
  Mat c(2, 2);
  c << 1, 2, 2, 1;  // det = -3
  CHECK_FALSE(apgame::is_p_matrix(c));
  Mat d(3, 3);
  d << 1, 0, 0, 0, 1, 5, 0, 5, 1;  // trailing 2x2 minor negative
  CHECK_FALSE(apgame::is_p_matrix(d));
  Mat big = Mat::Identity(13, 13);
  CHECK_THROWS_AS(apgame::is_p_matrix(big), apgame::TooLarge);
}

TEST_CASE("enumeration solves the canonical interior instance") {
  const apgame::LcpInstance lcp =
      instance({2.0, 1.0, 1.0, 2.0}, {-0.8, -0.8});
  const apgame::LcpEnumeration all = apgame::solve_lcp_enumerate(lcp);
  REQUIRE(all.solutions.size() == 1);
  const apgame::LcpSolution& sol = all.solutions.front();
  CHECK(sol.x[0] == Approx(0.8 / 3.0).margin(1e-12));
  CHECK(sol.x[1] == Approx(0.8 / 3.0).margin(1e-12));
  CHECK(sol.basis == std::vector<int>{0, 1});
  CHECK(sol.residual <= 1e-10);
}

TEST_CASE("enumeration reports every equilibrium under strong coupling") {
  // Strong symmetric coupling with q = -1: both single-AP corners and the
  // interior point satisfy the complementarity system.
  const apgame::LcpInstance lcp =
      instance({1.0, 1.5, 1.5, 1.0}, {-1.0, -1.0});
  const apgame::LcpEnumeration all = apgame::solve_lcp_enumerate(lcp);
  REQUIRE(all.solutions.size() == 3);
  // Sorted lexicographically by basis: {0}, {0,1}, {1}.
  CHECK(all.solutions[0].basis == std::vector<int>{0});
  CHECK(all.solutions[0].x[0] == Approx(1.0).margin(1e-12));
  CHECK(all.solutions[1].basis == std::vector<int>{0, 1});
  CHECK(all.solutions[1].x[0] == Approx(0.4).margin(1e-12));
  CHECK(all.solutions[1].x[1] == Approx(0.4).margin(1e-12));
  CHECK(all.solutions[2].basis == std::vector<int>{1});
  CHECK(all.solutions[2].x[1] == Approx(1.0).margin(1e-12));
  for (const apgame::LcpSolution& s : all.solutions) {
    CHECK(s.residual <= 1e-10);
  }
}

TEST_CASE("enumeration finds three splits in the strong-interference market") {
  // Hand-checked: supports {1}, {2} and {1,2} all admit equilibria here.
  const apgame::Market m = apgame::make_two_ap_market(1.0, 1.0, 3.6, 0.2);
  Vec p(2);
  p << 0.1, 0.6;
  const apgame::LcpEnumeration all =
      apgame::solve_lcp_enumerate(apgame::assemble_lcp(m, p));
  REQUIRE(all.solutions.size() == 3);
  CHECK(all.solutions[0].x[0] == Approx(0.45).margin(1e-12));
  CHECK(all.solutions[0].x[1] == 0.0);
  CHECK(all.solutions[1].x[0] == Approx(1.0 / 38.0).margin(1e-12));
  CHECK(all.solutions[1].x[1] == Approx(7.0 / 38.0).margin(1e-12));
  CHECK(all.solutions[2].x[0] == 0.0);
  CHECK(all.solutions[2].x[1] == Approx(0.2).margin(1e-12));
}

TEST_CASE("enumeration refuses oversized instances") {
  const int n = 13;
  apgame::LcpInstance lcp;
  lcp.m = Mat::Identity(n, n);
  lcp.q = Vec::Constant(n, -1.0);
  CHECK_THROWS_AS(apgame::solve_lcp_enumerate(lcp), apgame::TooLarge);
}

TEST_CASE("pivoting solver matches the enumeration oracle") {
  SECTION("canonical instance") {
    const apgame::LcpInstance lcp =
        instance({2.0, 1.0, 1.0, 2.0}, {-0.8, -0.8});
    const apgame::LcpSolution sol = apgame::solve_lcp_lemke(lcp);
    CHECK(sol.x[0] == Approx(0.8 / 3.0).margin(1e-10));
    CHECK(sol.x[1] == Approx(0.8 / 3.0).margin(1e-10));
    CHECK(sol.residual <= 1e-10);
  }
  SECTION("non-negative q solves trivially") {
    const apgame::LcpInstance lcp = instance({2.0, 0.5, 0.5, 2.0}, {0.3, 0.0});
    const apgame::LcpSolution sol = apgame::solve_lcp_lemke(lcp);
    CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("random weak markets up to eight APs") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> n_dist(1, 8);
    for (int k = 0; k < 100; ++k) {
      const apgame::Market m = apgame::sample_weak_market(rng, n_dist(rng));
      const Vec p = apgame::sample_prices(rng, m);
      const apgame::LcpInstance lcp = apgame::assemble_lcp(m, p);
      const apgame::LcpEnumeration all = apgame::solve_lcp_enumerate(lcp);
      REQUIRE(all.solutions.size() == 1);
      const apgame::LcpSolution piv = apgame::solve_lcp_lemke(lcp);
      CHECK((all.solutions.front().x - piv.x).lpNorm<Eigen::Infinity>() <=
            1e-8);
      CHECK(piv.residual <= 1e-10);
    }
  }
}

TEST_CASE("pivoting solver reports infeasible rays") {
  // x >= 0 with -x - 1 >= 0 has no solution; the pivot path must leave
  // along a ray instead of faking an answer.
  const apgame::LcpInstance lcp = instance({-1.0}, {-1.0});
  CHECK_THROWS_AS(apgame::solve_lcp_lemke(lcp), apgame::NumericError);
}

TEST_CASE("weak interference puts the assembled matrix in the P class") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> n_dist(1, 8);
  for (int k = 0; k < 200; ++k) {
    const apgame::Market m = apgame::sample_weak_market(rng, n_dist(rng));
    REQUIRE(m.weak_interference);
    CHECK(apgame::is_p_matrix(
        apgame::assemble_lcp(m, Vec::Zero(m.n())).m));
  }
}
