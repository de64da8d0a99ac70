#include "placekit/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "placekit/bachelier.hpp"
#include "placekit/black_scholes.hpp"
#include "placekit/lob.hpp"
#include "placekit/rho_engine.hpp"

namespace placekit::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::vector<double> GridSpec::points() const {
  if (!explicit_points.empty()) return explicit_points;
  std::vector<double> pts;
  if (n == 1) {
    pts.push_back(lo);
    return pts;
  }
  for (int i = 0; i < n; ++i)
    pts.push_back(lo + (hi - lo) * i / (n - 1.0));
  return pts;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string lo, hi, n;
    if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') ||
        !std::getline(ss, n))
      throw std::invalid_argument("grid: expected lo:hi:n");
    g.lo = std::stod(lo);
    g.hi = std::stod(hi);
    g.n = std::stoi(n);
    if (g.n < 1 || !(g.hi >= g.lo))
      throw std::invalid_argument("grid: need n >= 1 and hi >= lo");
    return g;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) g.explicit_points.push_back(std::stod(tok));
  if (g.explicit_points.empty())
    throw std::invalid_argument("grid: empty point list");
  return g;
}

void cmd_cost(const RunConfig& cfg, const std::vector<double>& x_grid,
              const std::string& out_dir) {
  if (x_grid.empty()) throw std::invalid_argument("cost: empty x grid");
  ExecProbability rho = cfg.make_rho();
  for (double t : cfg.horizons) {
    std::ostringstream name;
    name << out_dir << "/cost_t" << std::setprecision(6) << t << ".csv";
    auto out = open_out(name.str());
    out << "x,cost\n";
    for (double x : x_grid) {
      double c = cfg.model == sim::PriceModel::bachelier
                     ? bm::cost(cfg.market, rho, x, t)
                     : gbm::cost(cfg.market, rho, x, t);
      out << fmt(x) << "," << fmt(c) << "\n";
    }
  }
}

void cmd_optimal(const RunConfig& cfg, const std::string& out_dir) {
  ExecProbability rho = cfg.make_rho();
  auto out = open_out(out_dir + "/optimal.csv");
  bool bach = cfg.model == sim::PriceModel::bachelier;
  out << (bach ? "t,x_star,cost,boundary_case\n"
               : "t,y_star,price_level,cost,boundary_case\n");
  for (double t : cfg.horizons) {
    if (bach) {
      bm::SolverOptions opt;
      opt.root_tol = cfg.root_tol;
      PlacementSolution s = bm::optimal_x(cfg.market, rho, t, opt);
      double depth =
          s.boundary_case == PlacementSolution::Boundary::interior ? s.depth
                                                                   : 0.0;
      out << fmt(t) << "," << fmt(depth) << "," << fmt(s.cost) << ","
          << to_string(s.boundary_case) << "\n";
    } else {
      gbm::SolverOptions opt;
      opt.root_tol = cfg.root_tol;
      GbmPlacement s = gbm::optimal_y(cfg.market, rho, t, opt);
      double y =
          s.boundary_case == PlacementSolution::Boundary::interior ? s.y_star
                                                                   : 0.0;
      out << fmt(t) << "," << fmt(y) << "," << fmt(s.price_level) << ","
          << fmt(s.cost) << "," << to_string(s.boundary_case) << "\n";
    }
  }
}

void cmd_critical_time(const RunConfig& cfg, std::ostream& report,
                       const GridSpec* sweep_s0, const std::string& out_dir) {
  if (!(cfg.market.penalty() > 0))
    throw std::invalid_argument("critical-time: requires r + f > 0");
  ExecProbability rho = cfg.make_rho();
  if (cfg.model == sim::PriceModel::bachelier) {
    bm::CriticalTime ct = bm::critical_time(cfg.market, rho);
    report << "t0 " << fmt(ct.t0) << "\n";
    report << "bar_t0 " << fmt(ct.bar_t0) << "\n";
    report << "ratio_t0_over_bar " << fmt(ct.t0 / ct.bar_t0) << "\n";
  } else {
    gbm::CriticalTime ct = gbm::critical_time(cfg.market, rho);
    report << "t0_star " << fmt(ct.t0_star) << "\n";
    report << "bar_t " << fmt(ct.bar_t) << "\n";
    report << "tilde_t " << fmt(ct.tilde_t) << "\n";
    report << "lower_bound " << fmt(ct.lower)
           << (ct.lower_valid ? "" : " (left real domain; reported 0)")
           << "\n";
    report << "ordering_ok " << (ct.ordering_ok ? "yes" : "no") << "\n";
  }
  if (sweep_s0) {
    if (cfg.model != sim::PriceModel::black_scholes)
      throw std::invalid_argument("critical-time: --sweep-s0 is GBM-only");
    auto out = open_out(out_dir + "/critical_time_sweep.csv");
    out << "s0,t0_star,bar_t\n";
    for (double s0 : sweep_s0->points()) {
      MarketParams m = cfg.market;
      m.s0 = s0;
      gbm::CriticalTime ct = gbm::critical_time(m, rho);
      out << fmt(s0) << "," << fmt(ct.t0_star) << "," << fmt(ct.bar_t) << "\n";
    }
  }
}

void cmd_approx(const RunConfig& cfg, bool use_bar_t0,
                const std::string& out_dir) {
  ExecProbability rho = cfg.make_rho();
  auto out = open_out(out_dir + "/approx.csv");
  bool bach = cfg.model == sim::PriceModel::bachelier;
  out << "t,exact,first_order,second_order\n";
  for (double t : cfg.horizons) {
    if (bach) {
      bm::NearT0Approx a =
          bm::approx_xstar_near_t0(cfg.market, rho, t, use_bar_t0);
      PlacementSolution s = bm::optimal_x(cfg.market, rho, t);
      double exact =
          s.boundary_case == PlacementSolution::Boundary::interior ? s.depth
                                                                   : 0.0;
      out << fmt(t) << "," << fmt(exact) << "," << fmt(a.first_order) << ","
          << fmt(a.second_order) << "\n";
    } else {
      gbm::NearT0Approx a =
          gbm::approx_ystar_near_t0(cfg.market, rho, t, use_bar_t0);
      GbmPlacement s = gbm::optimal_y(cfg.market, rho, t);
      double exact =
          s.boundary_case == PlacementSolution::Boundary::interior ? s.y_star
                                                                   : 0.0;
      out << fmt(t) << "," << fmt(exact) << "," << fmt(a.first_order) << ","
          << fmt(a.second_order) << "\n";
    }
  }
}

void cmd_rho(const RunConfig& cfg, const std::vector<double>& depth_grid,
             const std::vector<double>& t_grid_seconds,
             const std::string& out_path) {
  if (depth_grid.empty() || t_grid_seconds.empty())
    throw std::invalid_argument("rho: empty grid");
  queue::QueueModel q = cfg.load_queue_model();
  queue::HittingModel h;
  h.kind = cfg.model == sim::PriceModel::bachelier
               ? queue::HittingModel::Kind::bachelier
               : queue::HittingModel::Kind::black_scholes;
  h.params = cfg.market;
  auto out = open_out(out_path);
  out << "depth,t_seconds,rho\n";
  for (double t : t_grid_seconds) {
    queue::RhoEngine eng(q, h, t);
    for (double d : depth_grid)
      out << fmt(d) << "," << fmt(t) << "," << fmt(eng.value(d)) << "\n";
  }
}

void cmd_rho_report(const RunConfig& cfg, double t_seconds,
                    std::ostream& report) {
  queue::QueueModel q = cfg.load_queue_model();
  queue::HittingModel h;
  h.kind = cfg.model == sim::PriceModel::bachelier
               ? queue::HittingModel::Kind::bachelier
               : queue::HittingModel::Kind::black_scholes;
  h.params = cfg.market;
  queue::ConditionReport rep = queue::condition_probe(q, h, t_seconds);
  report << "max_tail_dx_rho " << fmt(rep.max_tail_dx_rho) << "\n";
  report << "slope_ok " << (rep.slope_ok ? "yes" : "no") << "\n";
  report << "tail_x2rho_min " << fmt(rep.tail_x2rho_min) << "\n";
  if (std::isfinite(rep.tail_y2rho_min))
    report << "tail_y2rho_min " << fmt(rep.tail_y2rho_min) << "\n";
  report << "bound_2gb_sigma2_t2 " << fmt(rep.bound_2gb_sigma2_t2) << "\n";
  report << "tail_bound_ok " << (rep.tail_bound_ok ? "yes" : "no") << "\n";
  for (auto& [tp, d] : rep.d_proxy)
    report << "d_proxy_t" << tp << " " << fmt(d) << "\n";
}

void cmd_estimate(const std::string& input_csv, const std::string& out_path,
                  std::ostream& report) {
  lob::ParseReport parsed = lob::parse_events(input_csv);
  report << "parsed " << parsed.records.size() << " records, "
         << parsed.malformed.size() << " malformed\n";
  for (const auto& bad : parsed.malformed)
    report << "  line " << bad.line_no << ": " << bad.reason << "\n";
  lob::RateEstimates est = lob::estimate_rates(parsed.records);
  auto out = open_out(out_path);
  out << est.to_json() << "\n";
  report << "lambda_a " << fmt(est.lambda_a) << "\n";
  report << "lambda_b " << fmt(est.lambda_b) << "\n";
  report << "dep_a " << fmt(est.dep_a) << "\n";
  report << "dep_b " << fmt(est.dep_b) << "\n";
  report << "mean_bid_after_drop " << fmt(est.mean_bid_after_drop) << "\n";
}

void cmd_simulate(const RunConfig& cfg, const std::string& kind, double depth,
                  double t, long n_paths, std::ostream& report) {
  sim::SimConfig sc;
  sc.n_paths = n_paths;
  sc.seed = cfg.seed;
  if (kind == "continuous") {
    sc.dt = t / 200.0;
    ExecProbability rho = cfg.make_rho();
    sim::McEstimate e = sim::simulate_cost_continuous(cfg.market, rho,
                                                      cfg.model, depth, t, sc);
    report << "mean " << fmt(e.mean) << "\nstd_error " << fmt(e.std_error)
           << "\nn " << e.n << "\n";
  } else if (kind == "discrete") {
    queue::QueueModel q = cfg.load_queue_model();
    double eps = q.tick;
    double delta = std::pow(eps / cfg.market.sigma, 2);
    sim::DiscreteCostResult r = sim::simulate_cost_discrete(
        cfg.market, q, cfg.model, depth, t, delta, eps, sc);
    report << "mean " << fmt(r.cost.mean) << "\nstd_error "
           << fmt(r.cost.std_error) << "\ntouch_fraction "
           << fmt(r.touch_fraction) << "\nexec_given_touch "
           << fmt(r.exec_given_touch) << "\n";
  } else if (kind == "race") {
    queue::QueueModel q = cfg.load_queue_model();
    sim::McEstimate e = sim::simulate_queue_race(
        q, t, static_cast<int>(depth), q.depth_at(1) + 1, sc);
    report << "mean " << fmt(e.mean) << "\nstd_error " << fmt(e.std_error)
           << "\n";
  } else if (kind == "rho") {
    queue::QueueModel q = cfg.load_queue_model();
    queue::HittingModel h;
    h.kind = cfg.model == sim::PriceModel::bachelier
                 ? queue::HittingModel::Kind::bachelier
                 : queue::HittingModel::Kind::black_scholes;
    h.params = cfg.market;
    sc.dt = t / kSecondsPerDay / 2000.0;
    sim::McEstimate e = sim::simulate_rho(q, h, depth, t, sc);
    report << "mean " << fmt(e.mean) << "\nstd_error " << fmt(e.std_error)
           << "\n";
  } else {
    throw std::invalid_argument(
        "simulate: kind must be continuous|discrete|race|rho");
  }
}

}  // namespace placekit::cli
