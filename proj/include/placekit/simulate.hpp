#pragma once

#include <cstdint>

#include "placekit/queue_model.hpp"
#include "placekit/types.hpp"

// Independent Monte-Carlo oracles: path simulation of the trading strategy
// cost (continuous and discrete tick form) and discrete-event simulation of
// the queue races.  Paths use counter-based per-path RNG streams, so
// results are bit-identical for a given (seed, config) regardless of the
// worker count.

namespace placekit::sim {

struct SimConfig {
  long n_paths = 100000;
  double dt = 1e-4;  // Euler step, days
  std::uint64_t seed = 1;
  bool antithetic = false;
  void validate(double t) const;  // requires dt <= t/100
};

struct McEstimate {
  double mean = 0;
  double std_error = 0;
  long n = 0;
};

enum class PriceModel { bachelier, black_scholes };

// Expected cost of the limit-order strategy by path simulation with a
// Brownian-bridge correction of the running minimum.  The estimator maps
// each path to: never-touched -> S_t - S_0 + f; touched and executed
// (probability rho(x,t)) -> -x - r; touched, not executed -> -x + f.  The
// three branches integrate to exactly the closed-form expected cost.
McEstimate simulate_cost_continuous(const MarketParams& p,
                                    const ExecProbability& rho,
                                    PriceModel model, double x_or_y, double t,
                                    const SimConfig& cfg);

// P(running minimum reaches the level by t), bridge-corrected.
McEstimate simulate_touch_probability(const MarketParams& p, PriceModel model,
                                      double x_or_y, double t,
                                      const SimConfig& cfg);

// Tick-level strategy simulation: price moves +/- eps at exponential(delta)
// change times with up-probability (1 + mu delta/eps)/2; execution at the
// touch is decided by a queue race against the next price change.  Returns
// the mean cost over the literal strategy cases (market at t, executed,
// cancel-and-rebuy at -x+f+2eps, cancel at the level).
struct DiscreteCostResult {
  McEstimate cost;
  double touch_fraction = 0;     // P(level reached by t)
  double exec_given_touch = 0;   // measured conditional execution frequency
  double case_rebuy_fraction = 0;  // cancelled after a rebound
};
DiscreteCostResult simulate_cost_discrete(const MarketParams& p,
                                          const queue::QueueModel& q,
                                          PriceModel model, double x, double t,
                                          double delta, double eps,
                                          const SimConfig& cfg);

// Fraction of runs where the bid queue (l orders, pure death) depletes
// before the ask queue (i orders, birth-death) and before u seconds.
McEstimate simulate_queue_race(const queue::QueueModel& q, double u, int i,
                               int l, const SimConfig& cfg);

// Full composed rho(x, t) oracle: conditional hitting time by path
// simulation, Poisson cancellations ahead, stationary refill draw, then
// the depletion race over the remaining horizon.  t in seconds, depth in
// price units; cfg.dt in days for the hitting paths.
McEstimate simulate_rho(const queue::QueueModel& q, const queue::HittingModel& h,
                        double depth, double t, const SimConfig& cfg);

// Conditional hitting-time samples (seconds), for distribution tests.
std::vector<double> sample_hitting_times(const queue::HittingModel& h,
                                         double depth, double t_seconds,
                                         long n, const SimConfig& cfg);

}  // namespace placekit::sim
