#pragma once

#include "placekit/types.hpp"

// Expected-cost analytics when the best ask follows an arithmetic Brownian
// motion: closed-form cost, analytic depth/time derivatives, optimal depth
// x*(t), the critical horizon t0, the near-t0 expansion, and the large-t
// regime (theta0 bounds, theta1 correction).

namespace placekit::bm {

// C(x, t) for a buy limit order at depth x below the best ask.
double cost(const MarketParams& p, const ExecProbability& rho, double x,
            double t);

// Analytic partial derivatives of C.
double dC_dx(const MarketParams& p, const ExecProbability& rho, double x,
             double t);
double d2C_dx2(const MarketParams& p, const ExecProbability& rho, double x,
               double t);

// Closed forms at the x = 0+ boundary.
double dC_dx_at0(const MarketParams& p, const ExecProbability& rho, double t);
double d2C_dtdx_at0(const MarketParams& p, const ExecProbability& rho,
                    double t);
double d2C_dx2_at0(const MarketParams& p, const ExecProbability& rho,
                   double t);

// dC_dx / phi(alpha_t(x)); same sign as dC_dx but free of the Gaussian
// prefactor, so the interior root stays resolvable at large t.
double dC_dx_scaled(const MarketParams& p, const ExecProbability& rho,
                    double x, double t);
double d2C_dx2_scaled(const MarketParams& p, const ExecProbability& rho,
                      double x, double t);

struct SolverOptions {
  double root_tol = 1e-10;
  double ceiling_factor = 10.0;
};

PlacementSolution optimal_x(const MarketParams& p, const ExecProbability& rho,
                            double t, const SolverOptions& opt = {});

struct CriticalTime {
  double t0 = 0;
  double bar_t0 = 0;  // rho(0+) (r+f) / (2|mu|)
  int iterations = 0;
};
CriticalTime critical_time(const MarketParams& p, const ExecProbability& rho,
                           double root_tol = 1e-12);

struct NearT0Approx {
  double first_order = 0;   // kappa1 (t - t0)
  double second_order = 0;  // + kappa2 (t - t0)^2
  double kappa1 = 0;
  double kappa2 = 0;
  double t0_used = 0;
};
// use_bar_t0 substitutes the closed-form upper bound for t0 in both the
// expansion point and the coefficient evaluation.
NearT0Approx approx_xstar_near_t0(const MarketParams& p,
                                  const ExecProbability& rho, double t,
                                  bool use_bar_t0 = false);

// theta0 = sqrt(1 - 2 sigma^2 / (mu rho (r+f))), mu < 0.
double theta0(const MarketParams& p, double rho_const);

struct LargeTBounds {
  double lower = 0;  // -sigma sqrt(t) - mu t theta0
  double upper = 0;  // -mu theta0 t
  double validity_t_min = 0;  // lower bound requires t beyond this
  bool lower_valid = false;
};
LargeTBounds xstar_bounds_large_t(const MarketParams& p, double rho_const,
                                  double t);

struct Theta1Result {
  double value = 0;
  double term1 = 0, term2 = 0, term3 = 0;  // bracketed terms, for diagnostics
};
Theta1Result theta1(const MarketParams& p, double rho_const);

}  // namespace placekit::bm
