#include "placekit/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "placekit/interp.hpp"

namespace placekit {

void MarketParams::validate() const {
  if (!(sigma > 0)) throw std::invalid_argument("MarketParams: sigma must be > 0");
  if (!(s0 > 0)) throw std::invalid_argument("MarketParams: s0 must be > 0");
  if (rebate < 0 || fee < 0)
    throw std::invalid_argument("MarketParams: rebate and fee must be >= 0");
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(s0))
    throw std::invalid_argument("MarketParams: non-finite field");
}

StandardizedArgs StandardizedArgs::at(const MarketParams& p, double x,
                                      double t) {
  StandardizedArgs a;
  double st = p.sigma * std::sqrt(t);
  a.alpha_t = (x + p.mu * t) / st;
  a.beta_t = (-x + p.mu * t) / st;
  a.a_t = p.mu * std::sqrt(t) / p.sigma;
  return a;
}

GbmArgs GbmArgs::from(const MarketParams& p) {
  GbmArgs g;
  g.alpha_plus = p.mu + 0.5 * p.sigma * p.sigma;
  g.alpha_minus = p.mu - 0.5 * p.sigma * p.sigma;
  g.alpha = g.alpha_minus / p.sigma;
  g.beta = g.alpha_plus / p.sigma;
  return g;
}

ExecProbability ExecProbability::constant(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("ExecProbability: rho must be in [0,1]");
  ExecProbability e;
  e.kind_ = Kind::constant;
  e.rho0_ = rho;
  auto val = [rho](double, double) { return rho; };
  auto zero = [](double, double) { return 0.0; };
  e.ev_ = {val, zero, zero, zero, zero};
  return e;
}

ExecProbability ExecProbability::from_evaluators(Kind kind, double rho0,
                                                 Evaluators ev) {
  ExecProbability e;
  e.kind_ = kind;
  e.rho0_ = rho0;
  e.ev_ = std::move(ev);
  return e;
}

ExecProbability ExecProbability::tabulated(std::vector<double> xs,
                                           std::vector<double> ts,
                                           std::vector<double> values) {
  size_t nx = xs.size(), nt = ts.size();
  if (nx < 2 || nt < 2 || values.size() != nx * nt)
    throw std::invalid_argument("ExecProbability: bad table shape");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("ExecProbability: table value outside [0,1]");

  // One monotone cubic per t-slice in x; evaluation interpolates the slice
  // results (and slice partials) across t with the same scheme.
  auto slices = std::make_shared<std::vector<Pchip>>();
  for (size_t j = 0; j < nt; ++j) {
    std::vector<double> col(nx);
    for (size_t i = 0; i < nx; ++i) col[i] = values[i * nt + j];
    slices->emplace_back(xs, col);
  }
  auto ts_sh = std::make_shared<std::vector<double>>(ts);

  auto across_t = [slices, ts_sh](double x, double t, int deriv_x,
                                  int deriv_t) {
    std::vector<double> vals(ts_sh->size());
    for (size_t j = 0; j < ts_sh->size(); ++j) {
      const Pchip& s = (*slices)[j];
      vals[j] = deriv_x == 0   ? s.value(x)
                : deriv_x == 1 ? s.derivative(x)
                               : s.second_derivative(x);
    }
    Pchip along(*ts_sh, vals);
    return deriv_t == 0 ? along.value(t) : along.derivative(t);
  };

  double rho0 = across_t(xs.front(), ts.back(), 0, 0);
  ExecProbability e;
  e.kind_ = Kind::tabulated;
  e.rho0_ = std::clamp(rho0, 0.0, 1.0);
  e.ev_.value = [across_t](double x, double t) {
    return std::clamp(across_t(x, t, 0, 0), 0.0, 1.0);
  };
  e.ev_.dx = [across_t](double x, double t) { return across_t(x, t, 1, 0); };
  e.ev_.dt = [across_t](double x, double t) { return across_t(x, t, 0, 1); };
  e.ev_.dxx = [across_t](double x, double t) { return across_t(x, t, 2, 0); };
  e.ev_.dtx = [across_t](double x, double t) { return across_t(x, t, 1, 1); };
  return e;
}

double ExecProbability::value(double x, double t) const { return ev_.value(x, t); }
double ExecProbability::dx(double x, double t) const { return ev_.dx(x, t); }
double ExecProbability::dt(double x, double t) const { return ev_.dt(x, t); }
double ExecProbability::dxx(double x, double t) const { return ev_.dxx(x, t); }
double ExecProbability::dtx(double x, double t) const { return ev_.dtx(x, t); }

const char* to_string(PlacementSolution::Boundary b) {
  switch (b) {
    case PlacementSolution::Boundary::interior: return "interior";
    case PlacementSolution::Boundary::trivial_zero: return "trivial_zero";
    case PlacementSolution::Boundary::unbounded_flag: return "unbounded_flag";
  }
  return "?";
}

}  // namespace placekit
