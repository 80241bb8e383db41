#pragma once

// Declarative sweep configuration: line-oriented `key: value` text with
// nested matrix literals.  Example:
//
//   # duopoly sweep, strong rows handled numerically
//   w: 1.0
//   s: 1.0
//   gains: [[1, 0.3], [0, 1]]
//   sweep: a2
//   from: 0
//   to: 1.7
//   step: 0.02
//   outputs: [de]
//   allow_strong: true
//   out: fig4.csv
//
// Unknown or duplicate keys are rejected (ValidationError); malformed text
// reports line and column (ParseError).  Requesting closed-form outputs on a
// sweep that can leave the weak-interference regime is refused unless
// `allow_strong: true`, which switches those rows to the numeric fallbacks.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apgame/errors.hpp"
#include "apgame/market.hpp"

namespace apgame {

enum class SweepVar { a2, b1, s, p1, p2 };

enum class OutputKind { me_pd, me_uniform, de, pocs, pocp, regions, fd_curve };

inline const char* to_string(SweepVar v) {
  switch (v) {
    case SweepVar::a2: return "a2";
    case SweepVar::b1: return "b1";
    case SweepVar::s: return "s";
    case SweepVar::p1: return "p1";
    default: return "p2";
  }
}

inline const char* to_string(OutputKind k) {
  switch (k) {
    case OutputKind::me_pd: return "me_pd";
    case OutputKind::me_uniform: return "me_uniform";
    case OutputKind::de: return "de";
    case OutputKind::pocs: return "pocs";
    case OutputKind::pocp: return "pocp";
    case OutputKind::regions: return "regions";
    default: return "fd_curve";
  }
}

struct SweepConfig {
  double w = 1.0;
  double s = 1.0;
  Mat gains;  // normalized, unit diagonal; default 2-AP with a2=0, b1=0.3
  SweepVar sweep = SweepVar::a2;
  double from = 0.0;
  double to = 1.0;
  double step = 0.05;
  std::vector<OutputKind> outputs;
  std::string out_path;
  std::uint64_t seed = 0;
  bool allow_strong = false;
  double p1 = 0.1;  // fixed prices for region / demand-curve studies
  double p2 = 0.6;
  std::optional<Vec> prices;  // explicit vector for one-shot solves
  double b1_from = 0.0;  // secondary grid of the regions sweep
  double b1_to = 1.2;
  double b1_step = 0.05;

  bool has_output(OutputKind k) const {
    for (OutputKind o : outputs) {
      if (o == k) return true;
    }
    return false;
  }
};

// Command-line overrides applied before semantic validation.
struct ConfigOverrides {
  std::optional<double> step;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool allow_strong = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ValueCursor {
  const std::string& text;
  int line;
  int col0;           // 1-based column of text[0] in the original line
  std::size_t i = 0;  // scan position

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col0 + static_cast<int>(i));
  }
  void skip_ws() {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < text.size() && text[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  double number() {
    skip_ws();
    const char* start = text.c_str() + i;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) fail("expected a number");
    i += static_cast<std::size_t>(end - start);
    return v;
  }
  void done() {
    skip_ws();
    if (i != text.size()) fail("trailing characters");
  }
};

inline double parse_double(const std::string& v, int line, int col) {
  ValueCursor c{v, line, col};
  const double x = c.number();
  c.done();
  return x;
}

inline std::uint64_t parse_u64(const std::string& v, int line, int col) {
  ValueCursor c{v, line, col};
  c.skip_ws();
  const char* start = v.c_str() + c.i;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(start, &end, 10);
  if (end == start) c.fail("expected a non-negative integer");
  c.i += static_cast<std::size_t>(end - start);
  c.done();
  return static_cast<std::uint64_t>(x);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  const std::string t = trim(v);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ValidationError("key '" + key + "' expects true or false, got '" + t +
                        "'");
}

inline Mat parse_matrix(const std::string& v, int line, int col) {
  ValueCursor c{v, line, col};
  std::vector<std::vector<double>> rows;
  c.expect('[');
  do {
    c.expect('[');
    std::vector<double> row;
    do {
      row.push_back(c.number());
    } while (c.eat(','));
    c.expect(']');
    if (!rows.empty() && row.size() != rows.front().size()) {
      c.fail("ragged matrix rows");
    }
    rows.push_back(std::move(row));
  } while (c.eat(','));
  c.expect(']');
  c.done();
  Mat m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }
  return m;
}

inline Vec parse_vector(const std::string& v, int line, int col) {
  ValueCursor c{v, line, col};
  std::vector<double> vals;
  c.expect('[');
  do {
    vals.push_back(c.number());
  } while (c.eat(','));
  c.expect(']');
  c.done();
  Vec out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out[static_cast<int>(i)] = vals[i];
  }
  return out;
}

inline std::vector<std::string> parse_name_list(const std::string& v, int line,
                                                int col) {
  ValueCursor c{v, line, col};
  std::vector<std::string> names;
  c.expect('[');
  c.skip_ws();
  if (!c.eat(']')) {
    do {
      c.skip_ws();
      std::size_t start = c.i;
      while (c.i < c.text.size() &&
             (std::isalnum(static_cast<unsigned char>(c.text[c.i])) ||
              c.text[c.i] == '_')) {
        ++c.i;
      }
      if (c.i == start) c.fail("expected a name");
      names.push_back(c.text.substr(start, c.i - start));
    } while (c.eat(','));
    c.expect(']');
  }
  c.done();
  return names;
}

inline SweepVar sweep_var_from(const std::string& name) {
  if (name == "a2") return SweepVar::a2;
  if (name == "b1") return SweepVar::b1;
  if (name == "s") return SweepVar::s;
  if (name == "p1") return SweepVar::p1;
  if (name == "p2") return SweepVar::p2;
  throw ValidationError("key 'sweep' expects one of a2, b1, s, p1, p2; got '" +
                        name + "'");
}

inline OutputKind output_kind_from(const std::string& name) {
  if (name == "me_pd") return OutputKind::me_pd;
  if (name == "me_uniform") return OutputKind::me_uniform;
  if (name == "de") return OutputKind::de;
  if (name == "pocs") return OutputKind::pocs;
  if (name == "pocp") return OutputKind::pocp;
  if (name == "regions") return OutputKind::regions;
  if (name == "fd_curve") return OutputKind::fd_curve;
  throw ValidationError("key 'outputs' has unknown entry '" + name + "'");
}

inline void require_positive(double v, const char* key) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ValidationError(std::string("key '") + key +
                          "' must be finite and positive");
  }
}

inline void validate_gains(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() < 1) {
    throw ValidationError("key 'gains' must be a square matrix");
  }
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      const double v = g(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("key 'gains' entries must be finite and >= 0");
      }
      if (i == j && std::abs(v - 1.0) > 1e-9) {
        throw ValidationError(
            "key 'gains' must have a unit diagonal (normalized); use "
            "raw_gains for unnormalized channel data");
      }
    }
  }
}

}  // namespace detail

// The (closed-form) outputs whose hypotheses require weak interference.
inline bool needs_weak_interference(OutputKind k) {
  switch (k) {
    case OutputKind::me_pd:
    case OutputKind::me_uniform:
    case OutputKind::de:
    case OutputKind::pocs:
    case OutputKind::pocp:
      return true;
    default:
      return false;
  }
}

inline SweepConfig parse_config(const std::string& text,
                                const ConfigOverrides& overrides = {}) {
  SweepConfig cfg;
  cfg.gains = Mat(2, 2);
  cfg.gains << 1.0, 0.3, 0.0, 1.0;  // a2 = g(1,0) = 0, b1 = g(0,1) = 0.3

  std::optional<Mat> gains;
  std::optional<Mat> raw_gains;
  std::optional<bool> normalize;
  std::set<std::string> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (detail::trim(line).empty()) continue;

    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw ParseError("expected 'key: value'", line_no, 1);
    }
    const std::string key = detail::trim(line.substr(0, colon));
    if (key.empty()) {
      throw ParseError("empty key", line_no, 1);
    }
    std::size_t vstart = colon + 1;
    while (vstart < line.size() &&
           std::isspace(static_cast<unsigned char>(line[vstart]))) {
      ++vstart;
    }
    const std::string value = detail::trim(line.substr(vstart));
    const int vcol = static_cast<int>(vstart) + 1;
    if (value.empty()) {
      throw ParseError("key '" + key + "' has no value", line_no, vcol);
    }
    if (!seen.insert(key).second) {
      throw ValidationError("duplicate key '" + key + "'");
    }

    if (key == "w") {
      cfg.w = detail::parse_double(value, line_no, vcol);
    } else if (key == "s") {
      cfg.s = detail::parse_double(value, line_no, vcol);
    } else if (key == "gains") {
      gains = detail::parse_matrix(value, line_no, vcol);
    } else if (key == "raw_gains") {
      raw_gains = detail::parse_matrix(value, line_no, vcol);
    } else if (key == "normalize") {
      normalize = detail::parse_bool(value, key);
    } else if (key == "sweep") {
      cfg.sweep = detail::sweep_var_from(detail::trim(value));
    } else if (key == "from") {
      cfg.from = detail::parse_double(value, line_no, vcol);
    } else if (key == "to") {
      cfg.to = detail::parse_double(value, line_no, vcol);
    } else if (key == "step") {
      cfg.step = detail::parse_double(value, line_no, vcol);
    } else if (key == "outputs") {
      for (const std::string& name :
           detail::parse_name_list(value, line_no, vcol)) {
        cfg.outputs.push_back(detail::output_kind_from(name));
      }
    } else if (key == "out") {
      cfg.out_path = value;
    } else if (key == "seed") {
      cfg.seed = detail::parse_u64(value, line_no, vcol);
    } else if (key == "allow_strong") {
      cfg.allow_strong = detail::parse_bool(value, key);
    } else if (key == "p1") {
      cfg.p1 = detail::parse_double(value, line_no, vcol);
    } else if (key == "p2") {
      cfg.p2 = detail::parse_double(value, line_no, vcol);
    } else if (key == "prices") {
      cfg.prices = detail::parse_vector(value, line_no, vcol);
    } else if (key == "b1_from") {
      cfg.b1_from = detail::parse_double(value, line_no, vcol);
    } else if (key == "b1_to") {
      cfg.b1_to = detail::parse_double(value, line_no, vcol);
    } else if (key == "b1_step") {
      cfg.b1_step = detail::parse_double(value, line_no, vcol);
    } else {
      throw ValidationError("unknown key '" + key + "'");
    }
  }

  if (overrides.step) cfg.step = *overrides.step;
  if (overrides.out) cfg.out_path = *overrides.out;
  if (overrides.seed) cfg.seed = *overrides.seed;
  cfg.allow_strong = cfg.allow_strong || overrides.allow_strong;

  // --- semantic validation --------------------------------------------------
  detail::require_positive(cfg.w, "w");
  detail::require_positive(cfg.s, "s");
  detail::require_positive(cfg.step, "step");
  detail::require_positive(cfg.b1_step, "b1_step");
  if (!std::isfinite(cfg.from) || !std::isfinite(cfg.to) ||
      cfg.from > cfg.to) {
    throw ValidationError("keys 'from'/'to' must be finite with from <= to");
  }
  if (!std::isfinite(cfg.b1_from) || !std::isfinite(cfg.b1_to) ||
      cfg.b1_from > cfg.b1_to) {
    throw ValidationError(
        "keys 'b1_from'/'b1_to' must be finite with b1_from <= b1_to");
  }

  if (gains && raw_gains) {
    throw ValidationError("keys 'gains' and 'raw_gains' are exclusive");
  }
  if (normalize && !raw_gains) {
    throw ValidationError("key 'normalize' is only meaningful with raw_gains");
  }
  if (raw_gains) {
    if (normalize && !*normalize) {
      throw ValidationError(
          "raw_gains requires normalize: true (pass already-normalized data "
          "via 'gains' instead)");
    }
    try {
      cfg.gains = from_sinr(RawChannelModel{*raw_gains}).g;
    } catch (const InvalidArgument& e) {
      throw ValidationError(std::string("key 'raw_gains' is invalid: ") +
                            e.what());
    }
  } else if (gains) {
    detail::validate_gains(*gains);
    cfg.gains = *gains;
  }
  const int n = static_cast<int>(cfg.gains.rows());

  if (cfg.prices) {
    if (cfg.prices->size() != n) {
      throw ValidationError("key 'prices' must have one entry per AP");
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite((*cfg.prices)[i]) || (*cfg.prices)[i] < 0.0) {
        throw ValidationError("key 'prices' entries must be finite and >= 0");
      }
    }
  }
  if (!std::isfinite(cfg.p1) || !std::isfinite(cfg.p2) || cfg.p1 < 0.0 ||
      cfg.p2 < 0.0) {
    throw ValidationError("keys 'p1'/'p2' must be finite and >= 0");
  }

  const bool two_ap_sweep =
      cfg.sweep == SweepVar::a2 || cfg.sweep == SweepVar::b1;
  if (two_ap_sweep && n != 2) {
    throw ValidationError("sweeping a2/b1 needs a 2-AP gain matrix");
  }

  bool wants_closed_form = false;
  for (OutputKind k : cfg.outputs) {
    if (needs_weak_interference(k)) wants_closed_form = true;
  }
  if (wants_closed_form && n != 2) {
    throw ValidationError(
        "closed-form outputs (me_pd/me_uniform/de/pocs/pocp) need a 2-AP "
        "market");
  }
  if ((cfg.has_output(OutputKind::regions) ||
       cfg.has_output(OutputKind::fd_curve)) &&
      !(cfg.p1 < cfg.p2 && cfg.p2 < cfg.w)) {
    throw ValidationError(
        "region/demand-curve outputs need fixed prices p1 < p2 < w");
  }

  // Weak-interference guard: closed-form outputs on a sweep that can reach
  // a2 + b1 >= 2 are refused unless the numeric fallbacks are opted into.
  if (wants_closed_form && !cfg.allow_strong) {
    const double a2_base = cfg.gains(1, 0);
    const double b1_base = cfg.gains(0, 1);
    double worst = a2_base + b1_base;
    if (cfg.sweep == SweepVar::a2) worst = cfg.to + b1_base;
    if (cfg.sweep == SweepVar::b1) worst = a2_base + cfg.to;
    if (!(worst < 2.0)) {
      throw ValidationError(
          "sweep reaches a2 + b1 >= 2, outside the closed-form regime; set "
          "allow_strong: true to switch those rows to numeric fallbacks");
    }
  }
  return cfg;
}

// Swept parameter values: from, from+step, ..., capped at `to` (the endpoint
// is included when it lies on the step grid within one part in 10^9).
inline std::vector<double> sweep_values(double from, double to, double step) {
  std::vector<double> out;
  const double span = to - from;
  const int count = static_cast<int>(span / step + 1e-9) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(from + k * step);
  return out;
}

inline std::vector<double> sweep_values(const SweepConfig& cfg) {
  return sweep_values(cfg.from, cfg.to, cfg.step);
}

// Base market described by the config (no sweep value applied).
inline Market base_market(const SweepConfig& cfg) {
  Market m{make_demand(cfg.w, cfg.s), InterferenceMatrix{cfg.gains}, false};
  m.weak_interference = weak_interference_check(m.gains);
  return m;
}

// Market with the swept variable set to `v` (a2, b1 or s; price sweeps do
// not alter the market).
inline Market market_with(const SweepConfig& cfg, double v) {
  Mat g = cfg.gains;
  double s = cfg.s;
  switch (cfg.sweep) {
    case SweepVar::a2: g(1, 0) = v; break;
    case SweepVar::b1: g(0, 1) = v; break;
    case SweepVar::s: s = v; break;
    default: break;
  }
  Market m{make_demand(cfg.w, s), InterferenceMatrix{std::move(g)}, false};
  m.weak_interference = weak_interference_check(m.gains);
  return m;
}

}  // namespace apgame
