#include <cmath>
#include <ostream>
#include <sstream>

#include "placekit/bachelier.hpp"
#include "placekit/black_scholes.hpp"
#include "placekit/commands.hpp"
#include "placekit/lob.hpp"
#include "placekit/numerics.hpp"
#include "placekit/rho_engine.hpp"
#include "placekit/simulate.hpp"

// The `validate` verb: end-to-end cross checks of every closed form against
// its independent Monte-Carlo oracle, at reduced path counts so the whole
// suite stays deterministic and fast.

namespace placekit::cli {

namespace {

struct Suite {
  std::ostream& out;
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  }
};

std::string gap_str(double analytic, const sim::McEstimate& e) {
  std::ostringstream os;
  os << "analytic " << analytic << " vs mc " << e.mean << " +/- "
     << e.std_error;
  return os.str();
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& report) {
  Suite s{report};
  std::uint64_t seed = cfg.seed;
  report << "seed " << seed << ", tolerances abs " << cfg.abs_tol << " rel "
         << cfg.rel_tol << " root " << cfg.root_tol << "\n";

  // --- continuous cost estimator vs closed forms ---
  {
    MarketParams p{-0.25, 0.2, 1.0, 0.003, 0.003};
    ExecProbability rho = ExecProbability::constant(1.0);
    sim::SimConfig sc;
    sc.n_paths = 200000;
    sc.seed = seed;
    for (double t : {0.04, 0.3}) {
      double x = 0.5 * p.sigma * std::sqrt(t);
      sc.dt = t / 128.0;
      sim::McEstimate e = sim::simulate_cost_continuous(
          p, rho, sim::PriceModel::bachelier, x, t, sc);
      double a = bm::cost(p, rho, x, t);
      s.check("bachelier cost vs mc (t=" + std::to_string(t) + ")",
              std::abs(a - e.mean) <= 3.0 * e.std_error, gap_str(a, e));
    }
    MarketParams pg{-0.1, 0.2, 50.0, 0.003, 0.003};
    for (double t : {0.05, 0.4}) {
      double y = 0.5 * pg.sigma * std::sqrt(t);
      sc.dt = t / 128.0;
      sim::McEstimate e = sim::simulate_cost_continuous(
          pg, rho, sim::PriceModel::black_scholes, y, t, sc);
      double a = gbm::cost(pg, rho, y, t);
      s.check("black-scholes cost vs mc (t=" + std::to_string(t) + ")",
              std::abs(a - e.mean) <= 3.0 * e.std_error, gap_str(a, e));
    }
  }

  // --- bridge-corrected minimum vs reflection closed form ---
  {
    MarketParams p{-0.25, 0.2, 1.0, 0.0, 0.0};
    double t = 0.1, x = 0.05;
    sim::SimConfig sc;
    sc.n_paths = 200000;
    sc.seed = seed + 1;
    sc.dt = t / 128.0;
    sim::McEstimate e = sim::simulate_touch_probability(
        p, sim::PriceModel::bachelier, x, t, sc);
    double st = p.sigma * std::sqrt(t);
    double a = num::normal_cdf((-x - p.mu * t) / st) +
               std::exp(-2.0 * x * p.mu / (p.sigma * p.sigma)) *
                   num::normal_cdf((-x + p.mu * t) / st);
    s.check("bridge-corrected touch probability",
            std::abs(a - e.mean) <= 3.0 * e.std_error, gap_str(a, e));
  }

  // --- queue race: quadrature vs discrete-event simulation ---
  queue::QueueModel q;
  q.lambda_a = 21.78;
  q.lambda_b = 21.98;
  q.dep_a = 19.32;
  q.dep_b = 18.68;
  q.theta_k = {1.2, 0.7, 0.45, 0.3, 0.2, 0.15};
  q.f_a = queue::DiscreteDist::shifted_poisson(5.0);
  q.depth_profile = {38, 5, 5, 8, 12, 16, 16, 16};
  q.tick = 0.01;
  {
    sim::SimConfig sc;
    sc.n_paths = 100000;
    sc.seed = seed + 2;
    for (auto [i, l] : {std::pair{1, 1}, {6, 2}, {6, 39}}) {
      double u = 30.0;
      double a = queue::alpha_race(q, u, i, l);
      sim::McEstimate e = sim::simulate_queue_race(q, u, i, l, sc);
      std::ostringstream nm;
      nm << "alpha_race(" << i << "," << l << ") vs event sim";
      s.check(nm.str(), std::abs(a - e.mean) <= 3.0 * e.std_error,
              gap_str(a, e));
    }
  }

  // --- full rho vs composed oracle ---
  {
    queue::HittingModel h;
    h.kind = queue::HittingModel::Kind::bachelier;
    h.params = MarketParams{-0.25, 0.2, 50.0, 0.0, 0.0};
    double t = 60.0, depth = 2 * q.tick;
    double a = queue::rho(q, h, depth, t);
    sim::SimConfig sc;
    sc.n_paths = 20000;
    sc.seed = seed + 3;
    sc.dt = (t / kSecondsPerDay) / 1000.0;
    sim::McEstimate e = sim::simulate_rho(q, h, depth, t, sc);
    s.check("rho(2 ticks, 60s) vs composed oracle",
            std::abs(a - e.mean) <= 3.0 * e.std_error, gap_str(a, e));
  }

  // --- discrete tick strategy refines toward the continuous cost ---
  {
    MarketParams p{-0.25, 0.2, 1.0, 0.001, 0.002};
    double t = 0.02, x = 0.01;
    sim::SimConfig sc;
    sc.n_paths = 150000;
    sc.seed = seed + 4;
    double prev_gap = 0;
    bool shrinking = true;
    std::ostringstream detail;
    for (int level = 0; level < 3; ++level) {
      double eps = x / (2 << level);  // x stays on the tick grid
      double delta = std::pow(eps / p.sigma, 2);
      sim::DiscreteCostResult r = sim::simulate_cost_discrete(
          p, q, sim::PriceModel::bachelier, x, t, delta, eps, sc);
      ExecProbability rho_hat =
          ExecProbability::constant(std::clamp(r.exec_given_touch, 0.0, 1.0));
      double cont = bm::cost(p, rho_hat, x, t);
      double gap = std::abs(r.cost.mean - cont);
      detail << "eps=" << eps << " gap=" << gap << "  ";
      if (level > 0 && gap > prev_gap + 2.0 * r.cost.std_error)
        shrinking = false;
      prev_gap = gap;
    }
    s.check("discrete strategy refines to continuous cost", shrinking,
            detail.str());
  }

  // --- estimator recovery on a synthetic log ---
  {
    lob::SyntheticLogSpec spec;
    spec.n_events = 100000;
    spec.seed = seed + 5;
    auto events = lob::generate_synthetic_log(spec);
    lob::RateEstimates est = lob::estimate_rates(events);
    auto rel = [](double a, double b) { return std::abs(a - b) / b; };
    bool ok = rel(est.lambda_a, spec.lambda_a) < 0.05 &&
              rel(est.lambda_b, spec.lambda_b) < 0.05 &&
              rel(est.dep_a, spec.dep_a) < 0.05 &&
              rel(est.dep_b, spec.dep_b) < 0.05;
    std::ostringstream detail;
    detail << "lambda_a " << est.lambda_a << " dep_a " << est.dep_a
           << " lambda_b " << est.lambda_b << " dep_b " << est.dep_b;
    s.check("rate estimator recovers generator rates (5%)", ok, detail.str());
  }

  report << (s.failures == 0 ? "validation suite: all checks passed\n"
                             : "validation suite: FAILURES\n");
  return s.failures;
}

}  // namespace placekit::cli
