// Command-line front end: one-shot equilibrium solves, parameter sweeps with
// CSV/plot-data emission, and the cross-validation suites.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <apgame/apgame.hpp>

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::optional<double> step;
  std::optional<std::uint64_t> seed;
  bool allow_strong = false;
  bool plotdata = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path,
                  "Config file (line-oriented 'key: value' text)");
  sub->add_option("--out", o.out, "Output CSV path (default: stdout)");
  sub->add_option("--step", o.step, "Override the sweep step");
  sub->add_option("--seed", o.seed, "Seed for the randomized suites");
  sub->add_flag("--allow-strong", o.allow_strong,
                "Allow sweeps beyond the weak-interference regime "
                "(switches affected rows to numeric solvers)");
  sub->add_flag("--plotdata", o.plotdata,
                "Also write <out>.dat plot blocks and a JSON metadata sidecar");
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw apgame::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

apgame::SweepConfig load_config(const CommonOpts& o,
                                const std::string& fallback) {
  apgame::ConfigOverrides ov;
  ov.step = o.step;
  if (!o.out.empty()) ov.out = o.out;
  ov.seed = o.seed;
  ov.allow_strong = o.allow_strong;
  const std::string text =
      o.config_path.empty() ? fallback : read_file(o.config_path);
  return apgame::parse_config(text, ov);
}

void emit_table(const apgame::Table& t, const apgame::SweepConfig& cfg,
                const CommonOpts& o, const apgame::PlotdataOptions& popts) {
  if (cfg.out_path.empty()) {
    if (o.plotdata) {
      throw apgame::ValidationError("--plotdata needs --out (or 'out:')");
    }
    apgame::write_csv(std::cout, t);
    return;
  }
  apgame::emit_csv(t, cfg.out_path);
  std::cerr << "wrote " << cfg.out_path << " (" << t.rows.size()
            << " rows)\n";
  if (o.plotdata) {
    apgame::emit_plotdata(t, cfg.out_path + ".dat", popts);
    std::cerr << "wrote " << cfg.out_path << ".dat and .dat.meta.json\n";
  }
}

json vec_to_json(const apgame::Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json report_to_json(const apgame::EquilibriumReport& r) {
  return json{{"kind", apgame::to_string(r.kind)},
              {"prices", vec_to_json(r.prices)},
              {"flows", vec_to_json(r.flows)},
              {"profits", vec_to_json(r.profits)},
              {"total_profit", r.profits.sum()},
              {"case", r.case_tag},
              {"converged", r.converged}};
}

apgame::Vec fixed_prices(const apgame::SweepConfig& cfg, int n) {
  if (cfg.prices) return *cfg.prices;
  if (n != 2) {
    throw apgame::ValidationError(
        "markets with n != 2 need an explicit 'prices:' vector");
  }
  apgame::Vec p(2);
  p << cfg.p1, cfg.p2;
  return p;
}

int cmd_we(const CommonOpts& o) {
  const apgame::SweepConfig cfg = load_config(o, "");
  const apgame::Market market = apgame::base_market(cfg);
  const apgame::Vec prices = fixed_prices(cfg, market.n());
  const apgame::WardropResult r = apgame::wardrop_equilibrium(market, prices);
  json out{{"prices", vec_to_json(prices)},
           {"flows", vec_to_json(r.flows)},
           {"total_flow", r.flows.sum()},
           {"unique", r.unique},
           {"n_equilibria", r.all_equilibria.size()},
           {"weak_interference", market.weak_interference}};
  out["disutility"] = r.disutility ? json(*r.disutility) : json(nullptr);
  json eqs = json::array();
  for (const apgame::Vec& x : r.all_equilibria) eqs.push_back(vec_to_json(x));
  out["equilibria"] = eqs;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_me(const CommonOpts& o) {
  const apgame::SweepConfig cfg = load_config(o, "");
  const apgame::Market market = apgame::base_market(cfg);
  const json out{{"me_pd", report_to_json(apgame::monopoly_pd_auto(market))},
                 {"me_uniform",
                  report_to_json(apgame::monopoly_uniform_auto(market))}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_de(const CommonOpts& o) {
  const apgame::SweepConfig cfg = load_config(o, "");
  const apgame::Market market = apgame::base_market(cfg);
  std::cout << report_to_json(apgame::duopoly_auto(market)).dump(2) << "\n";
  return 0;
}

int cmd_metrics(const CommonOpts& o) {
  const apgame::SweepConfig cfg =
      load_config(o, apgame::default_metrics_config());
  const apgame::Table t = apgame::run_metrics_sweep(cfg);
  apgame::PlotdataOptions popts;
  popts.title = "efficiency sweep";
  popts.x_col = apgame::to_string(cfg.sweep);
  popts.x_label = apgame::to_string(cfg.sweep);
  popts.y_label = "ratio / welfare / profit";
  popts.params = {{"w", apgame::csv_num(cfg.w)},
                  {"s", apgame::csv_num(cfg.s)},
                  {"step", apgame::csv_num(cfg.step)}};
  emit_table(t, cfg, o, popts);
  return 0;
}

int cmd_fig4(const CommonOpts& o) {
  const apgame::SweepConfig cfg =
      load_config(o, apgame::default_fig4_config());
  const apgame::Table t = apgame::run_fig4(cfg);
  apgame::PlotdataOptions popts;
  popts.title = "monopoly vs duopoly prices, flows and profits";
  popts.x_col = "a2";
  popts.x_label = "a2";
  popts.y_label = "price / flow / profit";
  popts.params = {{"w", apgame::csv_num(cfg.w)},
                  {"s", apgame::csv_num(cfg.s)},
                  {"b1", apgame::csv_num(cfg.gains(0, 1))},
                  {"step", apgame::csv_num(cfg.step)}};
  emit_table(t, cfg, o, popts);
  return 0;
}

int cmd_fig5(const CommonOpts& o) {
  const apgame::SweepConfig cfg =
      load_config(o, apgame::default_fig5_config());
  const apgame::Table t = apgame::run_fig5(cfg);
  apgame::PlotdataOptions popts;
  popts.title = "efficiency of competition under symmetric coupling";
  popts.x_col = "a2";
  popts.group_col = "s";
  popts.x_label = "a2 (= b1)";
  popts.y_label = "PoCS / PoCP";
  popts.params = {{"w", apgame::csv_num(cfg.w)},
                  {"step", apgame::csv_num(cfg.step)}};
  emit_table(t, cfg, o, popts);
  return 0;
}

int cmd_regions(const CommonOpts& o) {
  const apgame::SweepConfig cfg =
      load_config(o, apgame::default_regions_config());
  const apgame::Table t = apgame::run_regions(cfg);
  apgame::PlotdataOptions popts;
  popts.title = "fixed-price region map and equilibrium counts";
  popts.x_col = "a2";
  popts.group_col = "b1";
  popts.x_label = "a2";
  popts.y_label = "b1";
  popts.params = {{"w", apgame::csv_num(cfg.w)},
                  {"s", apgame::csv_num(cfg.s)},
                  {"p1", apgame::csv_num(cfg.p1)},
                  {"p2", apgame::csv_num(cfg.p2)}};
  emit_table(t, cfg, o, popts);
  if (cfg.has_output(apgame::OutputKind::fd_curve)) {
    const apgame::Table fd = apgame::fd_curve_table(cfg);
    if (cfg.out_path.empty()) {
      std::cout << "\n";
      apgame::write_csv(std::cout, fd);
    } else {
      apgame::emit_csv(fd, cfg.out_path + ".fd.csv");
      std::cerr << "wrote " << cfg.out_path << ".fd.csv (" << fd.rows.size()
                << " rows)\n";
    }
  }
  return 0;
}

int cmd_verify(const CommonOpts& o) {
  const std::uint64_t seed = o.seed.value_or(12345u);
  bool all_ok = true;
  for (const apgame::SuiteResult& r : apgame::verify_all(seed)) {
    std::printf("[%s] %-26s %s\n", r.ok ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_ok = all_ok && r.ok;
  }
  std::printf("%s (seed %llu)\n", all_ok ? "all suites passed" : "FAILURES",
              static_cast<unsigned long long>(seed));
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pricing games between interference-coupled access points"};
  app.require_subcommand(1);
  CommonOpts o;
  CLI::App* c_we =
      app.add_subcommand("we", "Solve the user-equilibrium flow split at fixed prices");
  CLI::App* c_me =
      app.add_subcommand("me", "Monopoly prices (discriminating and uniform)");
  CLI::App* c_de = app.add_subcommand("de", "Duopoly price equilibrium");
  CLI::App* c_metrics =
      app.add_subcommand("metrics", "Efficiency sweep CSV (PoCS, PoCP, welfare)");
  CLI::App* c_fig4 =
      app.add_subcommand("fig4", "Monopoly-vs-duopoly sweep over a2");
  CLI::App* c_fig5 =
      app.add_subcommand("fig5", "Symmetric efficiency sweep for s in {0.1, 1, 10}");
  CLI::App* c_regions =
      app.add_subcommand("regions", "Fixed-price (a2, b1) region/multiplicity grid");
  CLI::App* c_verify =
      app.add_subcommand("verify", "Run the cross-validation suites");
  for (CLI::App* sub :
       {c_we, c_me, c_de, c_metrics, c_fig4, c_fig5, c_regions, c_verify}) {
    add_common(sub, o);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_we->parsed()) return cmd_we(o);
    if (c_me->parsed()) return cmd_me(o);
    if (c_de->parsed()) return cmd_de(o);
    if (c_metrics->parsed()) return cmd_metrics(o);
    if (c_fig4->parsed()) return cmd_fig4(o);
    if (c_fig5->parsed()) return cmd_fig5(o);
    if (c_regions->parsed()) return cmd_regions(o);
    if (c_verify->parsed()) return cmd_verify(o);
  } catch (const apgame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const apgame::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const apgame::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const apgame::HypothesisViolated& e) {
    std::cerr << "hypothesis violated: " << e.what() << "\n";
    return 2;
  } catch (const apgame::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const apgame::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
