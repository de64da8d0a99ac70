#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "placekit/numerics.hpp"

namespace placekit {

// Time unit is days, prices in currency units throughout the placement
// modules.  One trading day = 23400 seconds (6.5h session); the queue
// engine works in seconds and converts through this constant.
inline constexpr double kSecondsPerDay = 23400.0;

// Drift mu (price/day), volatility sigma (price/sqrt(day)), initial best
// ask s0, rebate r and fee f per share.  The placement problem depends on
// r and f only through the non-execution penalty c = r + f.
struct MarketParams {
  double mu = 0.0;
  double sigma = 0.0;
  double s0 = 1.0;
  double rebate = 0.0;
  double fee = 0.0;

  double penalty() const { return rebate + fee; }
  void validate() const;
};

// Standardized arguments for the Bachelier formulas:
//   alpha_t(x) = (x + mu t)/(sigma sqrt(t)),
//   beta_t(x) = (-x + mu t)/(sigma sqrt(t)),  a_t = mu sqrt(t)/sigma.
struct StandardizedArgs {
  double alpha_t = 0, beta_t = 0, a_t = 0;
  static StandardizedArgs at(const MarketParams& p, double x, double t);
};

// Log-price drift decomposition for the Black-Scholes formulas:
//   alpha_pm = mu +/- sigma^2/2, alpha = alpha_minus/sigma, beta = alpha_plus/sigma.
struct GbmArgs {
  double alpha_plus = 0, alpha_minus = 0, alpha = 0, beta = 0;
  static GbmArgs from(const MarketParams& p);
};

// Execution probability rho(x, t) together with its partial derivatives.
// Three kinds: constant (all partials zero), tabulated (monotone-cubic
// interpolant in x and t, partials from the interpolant), queue-backed
// (engine values sampled onto a table).  Values are clamped to [0, 1].
class ExecProbability {
 public:
  enum class Kind { constant, tabulated, queue_backed };

  static ExecProbability constant(double rho);
  // grid values[i*ts.size() + j] = rho(xs[i], ts[j])
  static ExecProbability tabulated(std::vector<double> xs,
                                   std::vector<double> ts,
                                   std::vector<double> values);
  // custom analytic evaluators (used by tests and the queue adapter)
  struct Evaluators {
    std::function<double(double, double)> value, dx, dt, dxx, dtx;
  };
  static ExecProbability from_evaluators(Kind kind, double rho0, Evaluators e);

  double value(double x, double t) const;
  double dx(double x, double t) const;
  double dt(double x, double t) const;
  double dxx(double x, double t) const;
  double dtx(double x, double t) const;

  double rho0() const { return rho0_; }  // limiting rho(0+)
  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }

 private:
  ExecProbability() = default;
  Kind kind_ = Kind::constant;
  double rho0_ = 1.0;
  Evaluators ev_;
};

// Solution of min_x C(x, t).  depth == 0 encodes the trivial placement
// "0+" (best or second best bid).
struct PlacementSolution {
  enum class Boundary { interior, trivial_zero, unbounded_flag };
  double depth = 0.0;
  double cost = 0.0;
  std::optional<num::RootBracket> bracket_used;
  int iterations = 0;
  Boundary boundary_case = Boundary::trivial_zero;
  std::string diagnostics;
};

// GBM counterpart in log-depth y; the order sits at price s0 e^{-y}.
struct GbmPlacement {
  double y_star = 0.0;
  double price_level = 0.0;
  double cost = 0.0;
  std::optional<num::RootBracket> bracket_used;
  int iterations = 0;
  PlacementSolution::Boundary boundary_case =
      PlacementSolution::Boundary::trivial_zero;
  std::string diagnostics;
};

const char* to_string(PlacementSolution::Boundary b);

}  // namespace placekit
