#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "placekit/queue_model.hpp"
#include "placekit/types.hpp"

// Execution probability rho(x, t) from the Poisson queue model: first
// passage of the price to the order level, cancellations ahead of the
// order, stationary refill of the opposite queue, and the depletion race
// between the two best queues.  All times here are SECONDS; MarketParams
// (day units) are converted through kSecondsPerDay.

namespace placekit::queue {

// Conditional first-passage density f_tau(s | 0 < tau < t) of the level
// "depth" (x for the Bachelier kind, log-depth y for Black-Scholes).
double hitting_density(const HittingModel& h, double depth, double t,
                       double s);
// P(tau < depth level hit by t), in log space; used by the tail probes.
double log_hit_probability(const HittingModel& h, double depth, double t);

// Density of the ask-queue depletion time sigma_a^i (defective when
// lambda_a > dep_a) and of the bid depletion time sigma_b^l (Gamma).
double depletion_density_ask(const QueueModel& q, int i, double s);
double depletion_density_bid(const QueueModel& q, int l, double s);
// P(sigma_b^l <= s)
double bid_depletion_cdf(const QueueModel& q, int l, double s);

// P(bid queue of l orders depletes before the ask queue of i orders and
// before u).
double alpha_race(const QueueModel& q, double u, int i, int l,
                  const num::QuadratureSpec& spec = {});
// u -> infinity limit; includes the mass on {sigma_a = infinity} of the
// supercritical ask queue.
double rho_limit_0plus(const QueueModel& q, int i, int l,
                       const num::QuadratureSpec& spec = {});
double rho_limit_0plus(const QueueModel& q, const DiscreteDist& i_dist, int l,
                       const num::QuadratureSpec& spec = {});

// P(N^{b,k eps}_s = j): Poisson(theta_k s) pmf for j < Q^b, upper tail at
// j = Q^b.  Rejects j outside [0, Q^b].
double cancellations_ahead(const QueueModel& q, int k, double s, int j);

// rho(x, t) per the queue model; depth is a price depth, mapped to the
// tick index k = round(depth/eps); depths below 1.5 eps route to the
// best-bid race.
double rho(const QueueModel& q, const HittingModel& h, double depth, double t);

// rho(eps, t) = alpha_t(Q^a(0), Q^b(0) + 1).
double rho_0plus_of_t(const QueueModel& q, double t, int qa0, int qb0);

struct ConditionReport {
  // far-field slope probe (expect <= ~0 at the ceiling)
  double max_tail_dx_rho = 0;
  // min over the tail grid of x^2 rho(x,t) and its theoretical floor
  double tail_x2rho_min = 0;
  double tail_y2rho_min = 0;  // e^y y^2 rho for the GBM coordinate
  double bound_2gb_sigma2_t2 = 0;
  std::vector<double> probe_xs;
  // D(t') = rho(2 eps, t') - rho(eps, t') at several horizons
  std::vector<std::pair<double, double>> d_proxy;
  bool tail_bound_ok = false;
  bool slope_ok = false;
};
ConditionReport condition_probe(const QueueModel& q, const HittingModel& h,
                                double t);
// Probe a generic rho surface (e.g. the constant kind): derivative checks
// only, queue-specific entries left empty.
ConditionReport condition_probe(const ExecProbability& rho, double x_ceiling,
                                double t);

// Precomputed engine: shares the race tables across many rho evaluations
// at one horizon.
class RhoEngine {
 public:
  RhoEngine(QueueModel q, HittingModel h, double t_seconds);
  ~RhoEngine();
  RhoEngine(RhoEngine&&) noexcept;
  double value(double depth) const;  // rho(depth, t)
  double horizon() const;
 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Adapter: samples the engine on a tick x depth grid and the given
// horizons (days) into a tabulated ExecProbability for the placement
// modules.
ExecProbability make_exec_probability(const QueueModel& q,
                                      const HittingModel& h,
                                      const std::vector<double>& ts_days,
                                      int max_ticks);

}  // namespace placekit::queue
