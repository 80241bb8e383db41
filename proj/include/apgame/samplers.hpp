#pragma once

// Deterministic random-instance generators for the validation suites.  All
// draws go through a caller-owned mt19937_64, so a fixed seed reproduces the
// exact instance sequence.

#include <random>

#include "apgame/errors.hpp"
#include "apgame/market.hpp"

namespace apgame {

// Weak-interference market with n APs: cross gains are capped at
// 0.9 / (n - 1) so every AP's total cross gain stays below 1.8 < 2,
// keeping the market strictly inside the uniqueness regime.
inline Market sample_weak_market(std::mt19937_64& rng, int n) {
  if (n < 1) throw InvalidArgument("sample_weak_market needs n >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = 0.5 + 1.5 * unit(rng);
  const double s = 0.1 + 1.9 * unit(rng);
  Mat g = Mat::Identity(n, n);
  const double cap = n > 1 ? 0.9 / (n - 1) : 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) g(i, j) = cap * unit(rng);
    }
  }
  Market m{make_demand(w, s), InterferenceMatrix{std::move(g)}, false};
  m.weak_interference = weak_interference_check(m.gains);
  return m;
}

// Two-AP weak market with cross gains in [0, gain_hi]; gain_hi < 1 keeps
// a2 + b1 < 2 unconditionally.
inline Market sample_two_ap_weak(std::mt19937_64& rng,
                                 double gain_hi = 0.999) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = 0.5 + 1.5 * unit(rng);
  const double s = 0.1 + 1.9 * unit(rng);
  const double a2 = gain_hi * unit(rng);
  const double b1 = gain_hi * unit(rng);
  return make_two_ap_market(w, s, a2, b1);
}

// Price vector spanning interior, near-boundary and above-choke values so
// zero-flow branches get exercised.
inline Vec sample_prices(std::mt19937_64& rng, const Market& market,
                         double hi_factor = 1.2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec p(market.n());
  for (int i = 0; i < market.n(); ++i) {
    p[i] = hi_factor * market.demand.w * unit(rng);
  }
  return p;
}

// Fixed-price two-AP scenario for the demand-correspondence suites: ordered
// prices strictly inside (0, w) and cross gains wide enough to reach every
// region, including a2 > 1 and a2*b1 > 1.
struct TwoApScenario {
  double a2 = 0.0;
  double b1 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

inline TwoApScenario sample_two_ap_scenario(std::mt19937_64& rng, double w,
                                            double a2_hi = 4.0,
                                            double b1_hi = 1.2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TwoApScenario sc;
  sc.a2 = a2_hi * unit(rng);
  sc.b1 = b1_hi * unit(rng);
  sc.p1 = w * (0.05 + 0.40 * unit(rng));
  sc.p2 = sc.p1 + w * (0.05 + 0.50 * unit(rng));  // <= 0.95 w, strictly above p1
  return sc;
}

}  // namespace apgame
