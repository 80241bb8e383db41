#pragma once

// Market environment for pricing games among interference-coupled wireless
// access points.
//
// Users picking an AP face a disutility d_i = p_i + l_i(x), where p_i is the
// posted price and l_i(x) = sum_j g(j,i) x_j is linear congestion: g(j,i) is
// the normalized interference gain that AP j's traffic inflicts on AP i's
// channel (g(i,i) = 1 after normalization).  Total traffic X = sum_i x_i is
// generated by a linear inverse demand u(X) = w - s X: users keep arriving
// while the cheapest available disutility is below u(X).

#include <Eigen/Dense>

#include <cmath>
#include <iostream>
#include <string>

#include "apgame/errors.hpp"

namespace apgame {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Linear inverse demand u(x) = w - s*x with w, s > 0.
struct DemandCurve {
  double w = 1.0;  // willingness-to-pay intercept u(0)
  double s = 1.0;  // demand slope

  double value(double x) const { return w - s * x; }      // u(x)
  double inverse(double d) const { return (w - d) / s; }  // u^{-1}(d)
  double choke() const { return w; }                      // price at which demand vanishes
};

inline DemandCurve make_demand(double w, double s) {
  if (!std::isfinite(w) || !std::isfinite(s) || w <= 0.0 || s <= 0.0) {
    throw InvalidArgument("demand curve requires finite w > 0 and s > 0");
  }
  return DemandCurve{w, s};
}

// Normalized interference gain matrix: unit diagonal, strictly positive
// entries.  Entry (j,i) scales the congestion AP j's flow adds on AP i.
struct InterferenceMatrix {
  Mat g;

  int size() const { return static_cast<int>(g.rows()); }

  // Two-AP shorthand used throughout the duopoly analysis:
  //   a2 = g(2->1): interference of AP 2's flow on AP 1,
  //   b1 = g(1->2): interference of AP 1's flow on AP 2.
  double a2() const { return g(1, 0); }
  double b1() const { return g(0, 1); }
};

// Raw (unnormalized) channel gains, e.g. from an SINR site survey.  Only the
// ratios matter: flows are measured in per-AP capacity units, so transmit
// power and the per-user payload cancel out of the congestion terms.
struct RawChannelModel {
  Mat raw_gains;
  double payload_bits = 1.0;  // kept for reporting; does not affect gains
};

struct Market {
  DemandCurve demand;
  InterferenceMatrix gains;
  bool weak_interference = false;

  int n() const { return gains.size(); }
};

struct BuildOptions {
  double eps_gain = 1e-9;   // floor applied to exact-zero off-diagonal gains
  double tau_diag = 1e-9;   // tolerance for accepting an approximately-unit diagonal
  bool warn_on_floor = true;
};

// Row-sum test guaranteeing a well-posed market: interference is "weak" when
// every AP's total in+out cross gain stays below twice its self gain,
//   sum_{j != i} (g(i,j) + g(j,i)) < 2   for all i.
// This makes M + M^T diagonally dominant and hence the equilibrium map a
// P-matrix (unique user equilibrium for every price vector).
inline bool weak_interference_check(const InterferenceMatrix& gains) {
  const int n = gains.size();
  for (int i = 0; i < n; ++i) {
    double cross = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cross += gains.g(i, j) + gains.g(j, i);
    }
    if (!(cross < 2.0)) return false;
  }
  return true;
}

inline Market build_market(const DemandCurve& demand, const Mat& gains,
                           const BuildOptions& opts = {}) {
  if (gains.rows() != gains.cols() || gains.rows() < 1) {
    throw DimensionMismatch("gain matrix must be square and non-empty, got " +
                            std::to_string(gains.rows()) + "x" +
                            std::to_string(gains.cols()));
  }
  const int n = static_cast<int>(gains.rows());
  Mat g = gains;
  int floored = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = g(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw NonPositiveGain("gain (" + std::to_string(i) + "," +
                              std::to_string(j) + ") = " + std::to_string(v) +
                              " must be strictly positive");
      }
      if (i == j) {
        if (std::abs(v - 1.0) > opts.tau_diag) {
          throw BadDiagonal("normalized gains need a unit diagonal; entry (" +
                            std::to_string(i) + "," + std::to_string(i) +
                            ") = " + std::to_string(v));
        }
        g(i, i) = 1.0;
      } else if (v < opts.eps_gain) {
        g(i, j) = opts.eps_gain;
        if (v == 0.0) ++floored;
      }
    }
  }
  if (floored > 0 && opts.warn_on_floor) {
    std::cerr << "apgame: floored " << floored
              << " zero cross gain(s) to " << opts.eps_gain << "\n";
  }
  Market m{demand, InterferenceMatrix{std::move(g)}, false};
  m.weak_interference = weak_interference_check(m.gains);
  return m;
}

// Normalize raw channel gains column-wise by the self gain of the receiving
// AP: g(j,i) = raw(j,i) / raw(i,i).  Off-diagonal results below eps_gain are
// floored so downstream positivity assumptions hold.
// Direct two-AP constructor for analytic sweeps.  Unlike build_market this
// keeps exact-zero cross gains (no floor), so closed-form spot values hold to
// machine precision.
inline Market make_two_ap_market(double w, double s, double a2, double b1) {
  if (!std::isfinite(a2) || !std::isfinite(b1) || a2 < 0.0 || b1 < 0.0) {
    throw NonPositiveGain("cross gains must be finite and non-negative");
  }
  Mat g(2, 2);
  g << 1.0, b1, a2, 1.0;
  Market m{make_demand(w, s), InterferenceMatrix{std::move(g)}, false};
  m.weak_interference = weak_interference_check(m.gains);
  return m;
}

inline InterferenceMatrix from_sinr(const RawChannelModel& model,
                                    double eps_gain = 1e-9) {
  const Mat& raw = model.raw_gains;
  if (raw.rows() != raw.cols() || raw.rows() < 1) {
    throw DimensionMismatch("raw gain matrix must be square and non-empty");
  }
  const int n = static_cast<int>(raw.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(raw(i, j)) || raw(i, j) <= 0.0) {
        throw NonPositiveGain("raw gain (" + std::to_string(i) + "," +
                              std::to_string(j) + ") must be > 0");
      }
    }
  }
  Mat g(n, n);
  for (int i = 0; i < n; ++i) {  // receiving AP / column index
    for (int j = 0; j < n; ++j) {
      g(j, i) = raw(j, i) / raw(i, i);
    }
    g(i, i) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && g(i, j) < eps_gain) g(i, j) = eps_gain;
    }
  }
  return InterferenceMatrix{std::move(g)};
}

inline void check_vector(const Market& market, const Vec& v, const char* what) {
  if (v.size() != market.n()) {
    throw DimensionMismatch(std::string(what) + " has length " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(market.n()));
  }
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw InvalidArgument(std::string(what) + "[" + std::to_string(i) +
                            "] = " + std::to_string(v[i]) +
                            " must be finite and non-negative");
    }
  }
}

// Per-AP congestion l(x) = G^T x; entry i aggregates every AP's flow scaled
// by its gain onto AP i's channel (including AP i's own flow).
inline Vec congestion(const Market& market, const Vec& flows) {
  check_vector(market, flows, "flows");
  return market.gains.g.transpose() * flows;
}

// Per-AP user disutility d = p + l(x).
inline Vec disutility(const Market& market, const Vec& prices,
                      const Vec& flows) {
  check_vector(market, prices, "prices");
  return prices + congestion(market, flows);
}

}  // namespace apgame
