#pragma once

#include <limits>

#include "placekit/types.hpp"

// Expected-cost analytics when the best ask follows a geometric Brownian
// motion.  The order sits at the price level s0 e^{-y}; everything is
// parameterized by the log-depth y > 0.

namespace placekit::gbm {

double cost(const MarketParams& p, const ExecProbability& rho, double y,
            double t);

double dC_dy(const MarketParams& p, const ExecProbability& rho, double y,
             double t);
double d2C_dy2(const MarketParams& p, const ExecProbability& rho, double y,
               double t);

double dC_dy_at0(const MarketParams& p, const ExecProbability& rho, double t);
double d2C_dtdy_at0(const MarketParams& p, const ExecProbability& rho,
                    double t);
double d2C_dy2_at0(const MarketParams& p, const ExecProbability& rho,
                   double t);

// dC_dy / phi(d_t), d_t = (-y - (mu - sigma^2/2) t)/(sigma sqrt(t)); keeps
// the interior root resolvable at large horizons.
double dC_dy_scaled(const MarketParams& p, const ExecProbability& rho,
                    double y, double t);
double d2C_dy2_scaled(const MarketParams& p, const ExecProbability& rho,
                      double y, double t);

struct SolverOptions {
  double root_tol = 1e-10;
  double ceiling_factor = 10.0;
  // search no deeper than this log-depth (e.g. -mu t for the small-sigma
  // local solution)
  double y_max = std::numeric_limits<double>::infinity();
  // global: lowest-cost stationary minimum; first_min: the shallowest one
  // (the branch tracked by the near-t0 expansion)
  enum class Branch { global, first_min } branch = Branch::global;
};

GbmPlacement optimal_y(const MarketParams& p, const ExecProbability& rho,
                       double t, const SolverOptions& opt = {});

struct CriticalTime {
  double t0_star = 0;
  double bar_t = 0;    // rho(0+) (r+f) / (2 |mu| s0)
  double tilde_t = 0;  // 2 bar_t; upper bound valid for any mu < 0
  double lower = 0;    // Proposition-style lower bound
  bool lower_valid = false;  // false when the square root left the real domain
  bool ordering_ok = false;  // lower < t0_star < (tilde_t or bar_t per regime)
  int iterations = 0;
};
CriticalTime critical_time(const MarketParams& p, const ExecProbability& rho,
                           double root_tol = 1e-14);

struct NearT0Approx {
  double first_order = 0;
  double second_order = 0;
  double rho1 = 0;
  double rho2 = 0;
  double t0_used = 0;
};
NearT0Approx approx_ystar_near_t0(const MarketParams& p,
                                  const ExecProbability& rho, double t,
                                  bool use_bar_t = false);

struct LargeT {
  double limit_slope = 0;         // -mu + 1.5 sigma^2 - sigma sqrt(-2mu + 2sigma^2)
  double second_order_value = 0;  // slope + ln(t)/t correction
};
LargeT ystar_large_t(const MarketParams& p, double rho_const, double t);

struct SmallSigma {
  double approx = 0;       // with the a/(2 ln(1/sigma)) correction
  double first_order = 0;  // -mu t - sqrt(2 sigma^2 t ln(1/sigma))
  double a_const = 0;
};
SmallSigma ystar_small_sigma(const MarketParams& p, double rho_const,
                             double sigma, double t);

}  // namespace placekit::gbm
