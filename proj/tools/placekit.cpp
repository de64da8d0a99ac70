// placekit: optimal limit-order placement analytics under diffusive price
// models, with a queue-model execution-probability engine and Monte-Carlo
// cross-checks.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
// 4 validation-suite failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "placekit/commands.hpp"
#include "placekit/numerics.hpp"

using namespace placekit;

namespace {

struct Global {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<double> tol;
};

cli::RunConfig load(const Global& g) {
  cli::RunConfig cfg = cli::load_run_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.tol) {
    cfg.abs_tol = *g.tol;
    cfg.rel_tol = *g.tol;
    cfg.root_tol = *g.tol;
  }
  if (!cfg.output.empty() && g.out_dir == ".") return cfg;
  cfg.output = g.out_dir;
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  return cli::GridSpec::parse(text).points();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal limit-order placement toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Global g;
  app.add_option("--config", g.config_path, "run configuration (json)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "rng seed override");
  app.add_option("--out", g.out_dir, "output directory");
  double tol_val = 0;
  auto* tol_opt = app.add_option("--tol", tol_val, "tolerance override");

  std::string x_grid_text = "0.001:0.5:200";
  auto* cost = app.add_subcommand("cost", "expected cost curves, one csv per horizon");
  cost->add_option("--x-grid", x_grid_text, "depth grid lo:hi:n or comma list");

  app.add_subcommand("optimal", "optimal placement per horizon");

  std::string sweep_text;
  auto* crit = app.add_subcommand("critical-time", "critical horizon report");
  crit->add_option("--sweep-s0", sweep_text, "s0 sweep lo:hi:n (GBM)");

  bool use_bar = false;
  auto* approx = app.add_subcommand("approx", "near-t0 expansions vs exact");
  approx->add_flag("--use-bar-t0", use_bar, "expand around the closed-form bound");

  std::string depth_grid_text = "0.01:0.1:10";
  std::string t_grid_text = "30,60,90";
  auto* rho = app.add_subcommand("rho", "queue-model rho surface csv");
  rho->add_option("--depth-grid", depth_grid_text, "depth grid");
  rho->add_option("--t-grid", t_grid_text, "horizons in seconds");

  double probe_t = 60.0;
  auto* rho_report = app.add_subcommand("rho-report", "far-field condition probe");
  rho_report->add_option("--t", probe_t, "horizon in seconds");

  app.add_subcommand("validate", "cross-check suite (closed forms vs oracles)");

  std::string est_in, est_out = "rates.json";
  auto* estimate = app.add_subcommand("estimate", "estimate queue rates from a LOB event csv");
  estimate->add_option("--input", est_in, "event csv")->required();
  estimate->add_option("--output", est_out, "rates json path");

  std::string sim_kind = "continuous";
  double sim_depth = 0.01, sim_t = 0.1;
  long sim_paths = 100000;
  auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo oracle");
  simulate->add_option("--kind", sim_kind, "continuous|discrete|race|rho");
  simulate->add_option("--depth", sim_depth, "depth (price units; i for race)");
  simulate->add_option("--t", sim_t, "horizon (days; seconds for race/rho)");
  simulate->add_option("--paths", sim_paths, "replications");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_val;
  if (*tol_opt) g.tol = tol_val;

  try {
    if (estimate->parsed()) {
      cli::cmd_estimate(est_in, est_out, std::cout);
      return 0;
    }
    cli::RunConfig cfg = load(g);
    std::string out = cfg.output.empty() ? "." : cfg.output;
    if (cost->parsed()) {
      cli::cmd_cost(cfg, parse_grid(x_grid_text), out);
    } else if (app.get_subcommand("optimal")->parsed()) {
      cli::cmd_optimal(cfg, out);
    } else if (crit->parsed()) {
      if (!sweep_text.empty()) {
        cli::GridSpec sweep = cli::GridSpec::parse(sweep_text);
        cli::cmd_critical_time(cfg, std::cout, &sweep, out);
      } else {
        cli::cmd_critical_time(cfg, std::cout);
      }
    } else if (approx->parsed()) {
      cli::cmd_approx(cfg, use_bar, out);
    } else if (rho->parsed()) {
      cli::cmd_rho(cfg, parse_grid(depth_grid_text), parse_grid(t_grid_text),
                   out + "/rho_surface.csv");
    } else if (rho_report->parsed()) {
      cli::cmd_rho_report(cfg, probe_t, std::cout);
    } else if (app.get_subcommand("validate")->parsed()) {
      int failures = cli::cmd_validate(cfg, std::cout);
      return failures == 0 ? 0 : 4;
    } else if (simulate->parsed()) {
      cli::cmd_simulate(cfg, sim_kind, sim_depth, sim_t, sim_paths, std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const num::IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what()
              << " (best estimate " << e.best_estimate << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
