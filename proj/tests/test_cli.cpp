#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "placekit/commands.hpp"
#include "placekit/config.hpp"
#include "placekit/lob.hpp"

using namespace placekit;

namespace {

const std::string kConfigDir = PLACEKIT_CONFIG_DIR;
const std::string kCli = PLACEKIT_CLI_PATH;

int run(const std::string& args, std::string* out = nullptr) {
  std::string cmd = kCli + " " + args + " > /tmp/placekit_out.txt 2>&1";
  int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream in("/tmp/placekit_out.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<double, double>> read_two_cols(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  return rows;
}

}  // namespace

TEST_CASE("missing config file exits with code 2") {
  CHECK(run("cost --config /nonexistent.json") == 2);
}

TEST_CASE("unknown config keys are rejected") {
  std::ofstream bad("/tmp/placekit_bad.json");
  bad << "{\"model\":\"bachelier\",\"market\":{\"mu\":-0.1,\"sigma\":0.2},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.1],\"surprise\":1}";
  bad.close();
  CHECK(run("optimal --config /tmp/placekit_bad.json") == 2);
}

TEST_CASE("config parser accepts comments, rejects bad rho") {
  cli::RunConfig cfg =
      cli::load_run_config(kConfigDir + "/reference.json");
  CHECK(cfg.market.mu == -0.25);
  CHECK(cfg.horizons.size() == 3);
  CHECK_THROWS_AS(
      cli::parse_run_config("{\"model\":\"bachelier\","
                            "\"market\":{\"mu\":-0.1,\"sigma\":0.2},"
                            "\"rho\":{\"constant\":1.5},\"horizons\":[0.1]}",
                            ""),
      std::invalid_argument);
}

TEST_CASE("cost command: one csv per horizon, stable format, deterministic") {
  std::string out1 = "/tmp/pk_cost1", out2 = "/tmp/pk_cost2";
  std::string base = "cost --config " + kConfigDir +
                     "/cost_family.json --x-grid 0.0005:0.02:40 --out ";
  REQUIRE(run(base + out1) == 0);
  REQUIRE(run(base + out2) == 0);
  std::string f1 = out1 + "/cost_t0.0184.csv";
  std::string c1 = slurp(f1);
  CHECK(c1.rfind("x,cost\n", 0) == 0);
  CHECK(c1 == slurp(out2 + "/cost_t0.0184.csv"));  // byte identical

  // family shape: the two largest horizons have an interior minimum,
  // the smallest does not
  auto interior_min = [&](const std::string& path) {
    auto rows = read_two_cols(path);
    size_t best = 0;
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].second < rows[best].second) best = i;
    return best > 0 && best + 1 < rows.size();
  };
  CHECK(!interior_min(out1 + "/cost_t0.0184.csv"));
  CHECK(interior_min(out1 + "/cost_t0.0334.csv"));
  CHECK(interior_min(out1 + "/cost_t0.0384.csv"));
}

TEST_CASE("single-point grid gives a single row") {
  std::string out = "/tmp/pk_cost_single";
  REQUIRE(run("cost --config " + kConfigDir +
              "/reference.json --x-grid 0.01 --out " + out) == 0);
  auto rows = read_two_cols(out + "/cost_t0.05.csv");
  CHECK(rows.size() == 1);
}

TEST_CASE("optimal command: positive drift yields trivial rows") {
  std::ofstream cfg("/tmp/pk_posmu.json");
  cfg << "{\"model\":\"bachelier\","
         "\"market\":{\"mu\":0.2,\"sigma\":0.2,\"rebate\":0.003,\"fee\":0.003},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.05,0.1]}";
  cfg.close();
  REQUIRE(run("optimal --config /tmp/pk_posmu.json --out /tmp/pk_opt") == 0);
  std::string text = slurp("/tmp/pk_opt/optimal.csv");
  CHECK(text.find("trivial_zero") != std::string::npos);
  CHECK(text.find("interior") == std::string::npos);
}

TEST_CASE("optimal command: horizons below the critical one come back flagged") {
  // t0 for these parameters is ~0.011; the first horizon sits below it
  std::ofstream cfg("/tmp/pk_subcrit.json");
  cfg << "{\"model\":\"bachelier\","
         "\"market\":{\"mu\":-0.25,\"sigma\":0.2,\"rebate\":0.003,"
         "\"fee\":0.003},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.004,0.1]}";
  cfg.close();
  REQUIRE(run("optimal --config /tmp/pk_subcrit.json --out /tmp/pk_sub") == 0);
  std::ifstream in("/tmp/pk_sub/optimal.csv");
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(row1.find("trivial_zero") != std::string::npos);
  CHECK(row1.rfind("0.004,0,", 0) == 0);  // depth encoded as 0 with the flag
  CHECK(row2.find("interior") != std::string::npos);
}

TEST_CASE("optimal command: GBM price level decreases with the horizon") {
  std::ofstream cfg("/tmp/pk_gbm_opt.json");
  cfg << "{\"model\":\"black-scholes\","
         "\"market\":{\"mu\":-0.1,\"sigma\":0.2,\"s0\":50.0,"
         "\"rebate\":0.003,\"fee\":0.003},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.05,0.1,0.2,0.35,0.5]}";
  cfg.close();
  REQUIRE(run("optimal --config /tmp/pk_gbm_opt.json --out /tmp/pk_gbm_opt") ==
          0);
  std::ifstream in("/tmp/pk_gbm_opt/optimal.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,y_star,price_level,cost,boundary_case");
  double prev_level = 51.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    REQUIRE(cols.size() == 5);
    double level = std::stod(cols[2]);
    CHECK(level < prev_level);
    prev_level = level;
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("critical-time sweep over s0 tracks the closed-form bound") {
  std::string out = "/tmp/pk_sweep";
  REQUIRE(run("critical-time --config " + kConfigDir +
              "/sweep_gbm.json --sweep-s0 20:100:9 --out " + out) == 0);
  std::ifstream in(out + "/critical_time_sweep.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "s0,t0_star,bar_t");
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string s0s, t0s, bars;
    std::getline(ss, s0s, ',');
    std::getline(ss, t0s, ',');
    std::getline(ss, bars);
    double s0 = std::stod(s0s), t0 = std::stod(t0s), bar = std::stod(bars);
    CHECK(bar == doctest::Approx(0.006 / (2.0 * 0.05 * s0)).epsilon(1e-9));
    CHECK(std::abs(t0 - bar) / t0 <= 0.10);
  }
}

TEST_CASE("critical-time rejects a zero penalty") {
  std::ofstream cfg("/tmp/pk_nofee.json");
  cfg << "{\"model\":\"bachelier\","
         "\"market\":{\"mu\":-0.1,\"sigma\":0.2},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.1]}";
  cfg.close();
  CHECK(run("critical-time --config /tmp/pk_nofee.json") == 2);
}

TEST_CASE("rho surface: deeper levels fill more often near the touch") {
  std::string out = "/tmp/pk_rho";
  REQUIRE(run("rho --config " + kConfigDir +
              "/queue_run.json --depth-grid 0.01,0.02,0.03 "
              "--t-grid 30,60,90 --out " + out) == 0);
  std::ifstream in(out + "/rho_surface.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "depth,t_seconds,rho");
  std::map<double, std::vector<double>> by_t;  // t -> rho at 1, 2, 3 ticks
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string d, t, r;
    std::getline(ss, d, ',');
    std::getline(ss, t, ',');
    std::getline(ss, r);
    by_t[std::stod(t)].push_back(std::stod(r));
  }
  REQUIRE(by_t.size() == 3);
  for (auto& [t, rhos] : by_t) {
    REQUIRE(rhos.size() == 3);
    CHECK(rhos[0] < rhos[1]);
    CHECK(rhos[1] < rhos[2]);
  }
}

TEST_CASE("empty grids are rejected") {
  CHECK(run("rho --config " + kConfigDir +
            "/queue_run.json --depth-grid '' --t-grid 30") == 2);
}

TEST_CASE("rho-report prints the condition probe") {
  std::string text;
  REQUIRE(run("rho-report --config " + kConfigDir +
              "/queue_run.json --t 60", &text) == 0);
  CHECK(text.find("max_tail_dx_rho") != std::string::npos);
  CHECK(text.find("tail_bound_ok yes") != std::string::npos);
  CHECK(text.find("slope_ok yes") != std::string::npos);
}

TEST_CASE("estimate command round trip") {
  lob::SyntheticLogSpec spec;
  spec.n_events = 20000;
  spec.seed = 77;
  auto events = lob::generate_synthetic_log(spec);
  lob::write_event_csv("/tmp/pk_events.csv", events);
  std::string text;
  REQUIRE(run("estimate --input /tmp/pk_events.csv --output /tmp/pk_rates.json",
              &text) == 0);
  CHECK(text.find("lambda_a") != std::string::npos);
  std::string json = slurp("/tmp/pk_rates.json");
  CHECK(json.find("\"dep_a\"") != std::string::npos);
  CHECK(json.find("\"f_a_hist\"") != std::string::npos);
}

TEST_CASE("simulate command honors seed override") {
  std::string a, b, c;
  std::string base = "simulate --config " + kConfigDir +
                     "/reference.json --kind continuous --depth 0.02 "
                     "--t 0.05 --paths 20000";
  REQUIRE(run(base + " --seed 1", &a) == 0);
  REQUIRE(run(base + " --seed 1", &b) == 0);
  REQUIRE(run(base + " --seed 2", &c) == 0);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("tabulated rho: csv loading, clamping, solver integration") {
  {
    std::ofstream tab("/tmp/pk_rho_table.csv");
    tab << "x,t,rho\n";
    for (double x : {0.0, 0.01, 0.02, 0.05, 0.1, 0.3}) {
      for (double t : {0.05, 0.1, 0.2, 0.4}) {
        double v = 0.55 + 0.35 * std::exp(-6.0 * x) * (1 - std::exp(-8.0 * t));
        tab << x << "," << t << "," << v << "\n";
      }
    }
  }
  ExecProbability rho = cli::load_rho_table("/tmp/pk_rho_table.csv");
  CHECK(rho.kind() == ExecProbability::Kind::tabulated);
  CHECK(rho.value(0.02, 0.1) ==
        doctest::Approx(0.55 + 0.35 * std::exp(-0.12) *
                                   (1 - std::exp(-0.8))).epsilon(1e-3));
  CHECK(rho.dx(0.02, 0.1) < 0.0);   // decreasing in depth
  CHECK(rho.dt(0.02, 0.1) > 0.0);   // increasing in horizon

  std::ofstream cfg("/tmp/pk_table_cfg.json");
  cfg << "{\"model\":\"bachelier\","
         "\"market\":{\"mu\":-0.25,\"sigma\":0.2,\"rebate\":0.003,"
         "\"fee\":0.003},"
         "\"rho\":{\"table\":\"/tmp/pk_rho_table.csv\"},"
         "\"horizons\":[0.1,0.2]}";
  cfg.close();
  REQUIRE(run("optimal --config /tmp/pk_table_cfg.json --out /tmp/pk_tab") ==
          0);
  std::string text = slurp("/tmp/pk_tab/optimal.csv");
  CHECK(text.find("interior") != std::string::npos);

  // out-of-range probabilities are rejected at load time
  std::ofstream bad("/tmp/pk_rho_bad.csv");
  bad << "x,t,rho\n0,0.1,0.5\n0,0.2,0.5\n0.1,0.1,1.4\n0.1,0.2,0.5\n";
  bad.close();
  CHECK_THROWS_AS(cli::load_rho_table("/tmp/pk_rho_bad.csv"),
                  std::invalid_argument);
}

TEST_CASE("approx command: expansion columns and failure below t0") {
  REQUIRE(run("approx --config " + kConfigDir +
              "/reference.json --out /tmp/pk_apx") == 0);
  std::ifstream in("/tmp/pk_apx/optimal.csv", std::ios::in);
  std::string text = slurp("/tmp/pk_apx/approx.csv");
  CHECK(text.rfind("t,exact,first_order,second_order\n", 0) == 0);
  REQUIRE(run("approx --config " + kConfigDir +
              "/reference.json --use-bar-t0 --out /tmp/pk_apx2") == 0);
  // a horizon below the critical time violates the expansion's domain
  std::ofstream cfg("/tmp/pk_apx_bad.json");
  cfg << "{\"model\":\"bachelier\","
         "\"market\":{\"mu\":-0.25,\"sigma\":0.2,\"rebate\":0.003,"
         "\"fee\":0.003},"
         "\"rho\":{\"constant\":1.0},\"horizons\":[0.004]}";
  cfg.close();
  CHECK(run("approx --config /tmp/pk_apx_bad.json --out /tmp/pk_apx3") == 3);
}

TEST_CASE("simulate command: discrete, race and composed-rho oracles") {
  std::string text;
  REQUIRE(run("simulate --config " + kConfigDir +
              "/queue_run.json --kind discrete --depth 0.02 --t 0.002 "
              "--paths 4000", &text) == 0);
  CHECK(text.find("touch_fraction") != std::string::npos);
  REQUIRE(run("simulate --config " + kConfigDir +
              "/queue_run.json --kind race --depth 6 --t 30 --paths 4000",
              &text) == 0);
  CHECK(text.find("mean") != std::string::npos);
  REQUIRE(run("simulate --config " + kConfigDir +
              "/queue_run.json --kind rho --depth 0.02 --t 40 --paths 300",
              &text) == 0);
  CHECK(text.find("std_error") != std::string::npos);
}

TEST_CASE("queue-backed rho drives the placement solver end to end") {
  REQUIRE(run("optimal --config " + kConfigDir +
              "/queue_opt.json --out /tmp/pk_qopt") == 0);
  std::ifstream in("/tmp/pk_qopt/optimal.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.find("interior") != std::string::npos);
  auto c1 = row.find(','), c2 = row.find(',', row.find(',') + 1);
  double depth = std::stod(row.substr(c1 + 1, c2 - c1 - 1));
  CHECK(depth > 0.01);  // at least one tick deep
  CHECK(depth < 0.40);  // inside the sampled surface

  std::string text;
  REQUIRE(run("critical-time --config " + kConfigDir + "/queue_opt.json",
              &text) == 0);
  std::stringstream ss(text);
  std::string key;
  double t0 = 0, bar = 0;
  while (ss >> key) {
    if (key == "t0") ss >> t0;
    else if (key == "bar_t0") ss >> bar;
    else ss.ignore(256, '\n');
  }
  CHECK(t0 > 0.0);
  CHECK(t0 <= bar);
  // the queue surface rises away from the touch, which pulls the critical
  // horizon well below the constant-rho bound
  CHECK(t0 / bar < 0.9);
}

TEST_CASE("validate honors seed and tolerance overrides in its report") {
  std::string text;
  int rc = run("validate --config " + kConfigDir +
               "/reference.json --seed 31337 --tol 1e-9", &text);
  CHECK(rc == 0);
  CHECK(text.find("seed 31337") != std::string::npos);
  CHECK(text.find("tolerances abs 1e-09") != std::string::npos);
  CHECK(text.find("all checks passed") != std::string::npos);
}

TEST_CASE("csv numbers carry 12 significant digits") {
  std::string out = "/tmp/pk_prec";
  REQUIRE(run("cost --config " + kConfigDir +
              "/reference.json --x-grid 0.0123456789123:0.2:2 --out " + out) ==
          0);
  std::string text = slurp(out + "/cost_t0.05.csv");
  CHECK(text.find("0.0123456789123") != std::string::npos);
}
