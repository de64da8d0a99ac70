#include "placekit/bachelier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "placekit/numerics.hpp"

namespace placekit::bm {

using num::cdf_over_pdf;
using num::exp_mul_cdf_over_pdf;
using num::normal_cdf;
using num::normal_pdf;

namespace {

void check_inputs(const MarketParams& p, double x, double t,
                  bool allow_zero_x) {
  p.validate();
  if (!std::isfinite(x) || !std::isfinite(t))
    throw std::invalid_argument("bachelier: non-finite input");
  if (!(t > 0)) throw std::invalid_argument("bachelier: t must be > 0");
  if (!allow_zero_x && !(x > 0))
    throw std::invalid_argument("bachelier: x must be > 0");
}

// e^{-2 x mu / sigma^2} N(beta_t(x)) without overflow: the reflection
// identity e^{-2 x mu / sigma^2} phi(beta) = phi(alpha) turns the product
// into phi(alpha) * N(beta)/phi(beta).
double refl_times_cdf(const MarketParams& p, double x, double t) {
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double log_w = -2.0 * x * p.mu / (p.sigma * p.sigma);
  if (log_w < 600.0) return std::exp(log_w) * normal_cdf(s.beta_t);
  return normal_pdf(s.alpha_t) * cdf_over_pdf(s.beta_t);
}

}  // namespace

double cost(const MarketParams& p, const ExecProbability& rho, double x,
            double t) {
  check_inputs(p, x, t, false);
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double c = p.penalty();
  double r = rho.value(x, t);
  double en_beta = refl_times_cdf(p, x, t);
  double hit = normal_cdf(-s.alpha_t) + en_beta;  // P(Y_t <= -x)
  return hit * (-x - r * c) + p.mu * t * normal_cdf(s.alpha_t) +
         (2.0 * x - p.mu * t) * en_beta + p.fee;
}

double dC_dx(const MarketParams& p, const ExecProbability& rho, double x,
             double t) {
  check_inputs(p, x, t, false);
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double r = rho.value(x, t);
  double st = sig * std::sqrt(t);
  double en_beta = refl_times_cdf(p, x, t);
  // N(alpha) - 1 written as -sf(alpha): the cdf saturates at 1 long before
  // the other terms stop mattering
  double out = 2.0 * normal_pdf(s.alpha_t) * (c * r + mu * t) / st +
               (2.0 / (sig * sig)) * en_beta *
                   (-mu * (x - mu * t) + mu * c * r + 0.5 * sig * sig) -
               num::normal_sf(s.alpha_t);
  double rx = rho.dx(x, t);
  if (rx != 0.0)
    out -= c * rx * (normal_cdf(-s.alpha_t) + en_beta);
  return out;
}

double d2C_dx2(const MarketParams& p, const ExecProbability& rho, double x,
               double t) {
  check_inputs(p, x, t, false);
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double r = rho.value(x, t);
  double sq = std::sqrt(t);
  double en_beta = refl_times_cdf(p, x, t);
  double out =
      -normal_pdf(s.alpha_t) / (sig * sig * sig * t * sq) *
          (2.0 * c * r * x + 4.0 * mu * t * (c * r + mu * t)) +
      (4.0 * mu / (sig * sig * sig * sig)) * en_beta *
          (mu * (x - mu * t) - mu * c * r - sig * sig);
  double rx = rho.dx(x, t), rxx = rho.dxx(x, t);
  if (rxx != 0.0)
    out -= c * rxx * (normal_cdf(-s.alpha_t) + en_beta);
  if (rx != 0.0)
    out += (4.0 * c * rx / (sig * sig * sq)) *
           (sig * normal_pdf(s.alpha_t) + mu * sq * en_beta);
  return out;
}

double dC_dx_at0(const MarketParams& p, const ExecProbability& rho, double t) {
  check_inputs(p, 0.0, t, true);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double a = mu * std::sqrt(t) / sig;
  double r0 = rho.value(0.0, t);
  double fn = normal_pdf(a) + normal_cdf(a) * a;
  return fn * (2.0 / sig) * (c * r0 / std::sqrt(t) + mu * std::sqrt(t)) +
         2.0 * normal_cdf(a) - 1.0 - c * rho.dx(0.0, t);
}

double d2C_dtdx_at0(const MarketParams& p, const ExecProbability& rho,
                    double t) {
  check_inputs(p, 0.0, t, true);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double sq = std::sqrt(t);
  double a = mu * sq / sig;
  double r0 = rho.value(0.0, t);
  double fn = normal_pdf(a) + a * normal_cdf(a);
  // the d_t rho(0,t) term vanishes under the usual constant-in-t rho(0+)
  return -normal_pdf(a) * c * r0 / (sig * t * sq) +
         (2.0 * mu / (sig * sq)) * fn +
         (2.0 * c / (sig * sq)) * fn * rho.dt(0.0, t) - c * rho.dtx(0.0, t);
}

double d2C_dx2_at0(const MarketParams& p, const ExecProbability& rho,
                   double t) {
  check_inputs(p, 0.0, t, true);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double sq = std::sqrt(t);
  double a = mu * sq / sig;
  double r0 = rho.value(0.0, t);
  double fn = normal_pdf(a) + a * normal_cdf(a);
  return -fn * (4.0 * mu * (c * r0 + mu * t) / (sig * sig * sig * sq) -
                4.0 * c * rho.dx(0.0, t) / (sig * sq)) -
         4.0 * mu * normal_cdf(a) / (sig * sig) - c * rho.dxx(0.0, t);
}

double dC_dx_scaled(const MarketParams& p, const ExecProbability& rho,
                    double x, double t) {
  check_inputs(p, x, t, false);
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double r = rho.value(x, t);
  double st = sig * std::sqrt(t);
  double l_beta = cdf_over_pdf(s.beta_t);
  double l_malpha = cdf_over_pdf(-s.alpha_t);
  double out = 2.0 * (c * r + mu * t) / st +
               (2.0 / (sig * sig)) *
                   (-mu * (x - mu * t) + mu * c * r + 0.5 * sig * sig) *
                   l_beta -
               l_malpha;
  double rx = rho.dx(x, t);
  if (rx != 0.0) out -= c * rx * (l_malpha + l_beta);
  return out;
}

double d2C_dx2_scaled(const MarketParams& p, const ExecProbability& rho,
                      double x, double t) {
  check_inputs(p, x, t, false);
  StandardizedArgs s = StandardizedArgs::at(p, x, t);
  double sig = p.sigma, mu = p.mu, c = p.penalty();
  double r = rho.value(x, t);
  double sq = std::sqrt(t);
  double l_beta = cdf_over_pdf(s.beta_t);
  double out = -(2.0 * c * r * x + 4.0 * mu * t * (c * r + mu * t)) /
                   (sig * sig * sig * t * sq) +
               (4.0 * mu / (sig * sig * sig * sig)) *
                   (mu * (x - mu * t) - mu * c * r - sig * sig) * l_beta;
  double rx = rho.dx(x, t), rxx = rho.dxx(x, t);
  if (rxx != 0.0) out -= c * rxx * (cdf_over_pdf(-s.alpha_t) + l_beta);
  if (rx != 0.0)
    out += (4.0 * c * rx / (sig * sig * sq)) * (sig + mu * sq * l_beta);
  return out;
}

PlacementSolution optimal_x(const MarketParams& p, const ExecProbability& rho,
                            double t, const SolverOptions& opt) {
  check_inputs(p, 0.0, t, true);
  PlacementSolution sol;
  double g0 = dC_dx_at0(p, rho, t);
  double trivial_cost = p.fee - rho.value(0.0, t) * p.penalty();
  if (g0 >= 0.0) {
    sol.depth = 0.0;
    sol.cost = trivial_cost;
    sol.boundary_case = PlacementSolution::Boundary::trivial_zero;
    if (g0 == 0.0) sol.diagnostics = "interior-degenerate: dC/dx(0+,t) = 0";
    return sol;
  }

  double sig = p.sigma, mu = p.mu;
  double sq = std::sqrt(t);
  bool const_rho = rho.is_constant();
  double ceiling, hi;
  if (const_rho && mu < 0) {
    double th0 = theta0(p, rho.rho0());
    ceiling = opt.ceiling_factor * (-mu * t * th0 + sig * sq);
    hi = 2.0 * (-mu * th0 * t);
  } else {
    ceiling = opt.ceiling_factor * (std::max(-mu * t, 0.0) + 6.0 * sig * sq);
    hi = std::max(-mu * t, 0.0) + sig * sq;
  }
  double lo = 1e-9 * sig * sq;
  auto g = [&](double x) { return dC_dx_scaled(p, rho, x, t); };
  double f_lo = g(lo);
  if (f_lo >= 0.0) {
    // boundary derivative negative but immediately positive inside:
    // treat as trivial (numerically degenerate at this tolerance)
    sol.depth = 0.0;
    sol.cost = trivial_cost;
    sol.boundary_case = PlacementSolution::Boundary::trivial_zero;
    sol.diagnostics = "sign change below resolvable depth";
    return sol;
  }
  double f_hi = g(hi);
  int expand = 0;
  while (f_hi < 0.0 && hi < ceiling) {
    hi = std::min(hi * 1.6, ceiling);
    f_hi = g(hi);
    ++expand;
  }
  if (f_hi < 0.0) {
    sol.depth = std::numeric_limits<double>::infinity();
    sol.cost = std::numeric_limits<double>::quiet_NaN();
    sol.boundary_case = PlacementSolution::Boundary::unbounded_flag;
    std::ostringstream os;
    os << "no sign change of dC/dx below ceiling " << ceiling
       << "; far-field conditions on rho likely violated";
    sol.diagnostics = os.str();
    return sol;
  }
  num::RootBracket br{lo, hi, f_lo, f_hi};
  num::RootResult res = num::find_root(g, br, opt.root_tol);
  sol.depth = res.x;
  sol.cost = cost(p, rho, res.x, t);
  sol.bracket_used = br;
  sol.iterations = res.iterations + expand;
  sol.boundary_case = PlacementSolution::Boundary::interior;
  double curvature = d2C_dx2_scaled(p, rho, res.x, t);
  if (curvature < 0) {
    sol.diagnostics = "second-order condition violated at located root";
  }
  return sol;
}

CriticalTime critical_time(const MarketParams& p, const ExecProbability& rho,
                           double root_tol) {
  p.validate();
  if (!(p.mu < 0))
    throw std::domain_error("critical_time: requires mu < 0");
  if (!(p.penalty() > 0))
    throw std::domain_error("critical_time: requires r + f > 0");
  CriticalTime out;
  out.bar_t0 = rho.rho0() * p.penalty() / (2.0 * std::abs(p.mu));
  auto g = [&](double t) { return dC_dx_at0(p, rho, t); };
  double t_lo = out.bar_t0 * 1e-10;
  double f_lo = g(t_lo), f_hi = g(out.bar_t0);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    std::ostringstream os;
    os << "critical_time: no sign change of dC/dx(0+,t) on (0, bar_t0]: "
       << "f(" << t_lo << ")=" << f_lo << ", f(bar_t0)=" << f_hi
       << "; hypotheses violated";
    throw std::runtime_error(os.str());
  }
  num::RootBracket br{t_lo, out.bar_t0, f_lo, f_hi};
  num::RootResult res = num::find_root(g, br, root_tol);
  out.t0 = res.x;
  out.iterations = res.iterations;
  if (!(out.t0 > 0.0 && out.t0 <= out.bar_t0))
    throw std::runtime_error("critical_time: t0 outside (0, bar_t0]");
  return out;
}

NearT0Approx approx_xstar_near_t0(const MarketParams& p,
                                  const ExecProbability& rho, double t,
                                  bool use_bar_t0) {
  if (!(p.mu < 0))
    throw std::domain_error("approx_xstar_near_t0: requires mu < 0");
  CriticalTime ct = critical_time(p, rho);
  double t0 = use_bar_t0 ? ct.bar_t0 : ct.t0;
  if (t < t0)
    throw std::domain_error("approx_xstar_near_t0: requires t >= t0");

  double dxx = d2C_dx2_at0(p, rho, t0);
  if (!(dxx > 0))
    throw std::runtime_error("approx_xstar_near_t0: d2C/dx2(0,t0) <= 0");
  double dtx = d2C_dtdx_at0(p, rho, t0);
  double k1 = -dtx / dxx;
  if (!(k1 > 0))
    throw std::runtime_error("approx_xstar_near_t0: kappa1 <= 0");

  // third-order partials by differencing the analytic second-order forms
  double hx = 1e-5 * p.sigma * std::sqrt(t0);
  double ht = 1e-5 * t0;
  // one-sided in x (the x >= 0 boundary), central in t
  double d3x = (-3.0 * dxx + 4.0 * d2C_dx2(p, rho, hx, t0) -
                d2C_dx2(p, rho, 2.0 * hx, t0)) /
               (2.0 * hx);
  double d3tx2 =
      (d2C_dx2_at0(p, rho, t0 + ht) - d2C_dx2_at0(p, rho, t0 - ht)) /
      (2.0 * ht);
  double d3t2x =
      (d2C_dtdx_at0(p, rho, t0 + ht) - d2C_dtdx_at0(p, rho, t0 - ht)) /
      (2.0 * ht);
  double k2 = -(0.5 * d3x * k1 * k1 + d3tx2 * k1 + 0.5 * d3t2x) / dxx;

  NearT0Approx out;
  double dt = t - t0;
  out.kappa1 = k1;
  out.kappa2 = k2;
  out.t0_used = t0;
  out.first_order = k1 * dt;
  out.second_order = k1 * dt + k2 * dt * dt;
  return out;
}

double theta0(const MarketParams& p, double rho_const) {
  p.validate();
  if (!(p.mu < 0)) throw std::domain_error("theta0: requires mu < 0");
  if (!(rho_const > 0) || !(p.penalty() > 0))
    throw std::domain_error("theta0: requires rho (r+f) > 0");
  return std::sqrt(1.0 - 2.0 * p.sigma * p.sigma /
                             (p.mu * rho_const * p.penalty()));
}

LargeTBounds xstar_bounds_large_t(const MarketParams& p, double rho_const,
                                  double t) {
  double th0 = theta0(p, rho_const);
  LargeTBounds b;
  b.upper = -p.mu * th0 * t;
  b.lower = -p.sigma * std::sqrt(t) - p.mu * th0 * t;
  double c = rho_const * p.penalty();
  b.validity_t_min =
      std::max(c / (-p.mu),
               p.sigma * p.sigma / (p.mu * p.mu * (th0 - 1.0) * (th0 - 1.0)));
  b.lower_valid = t > b.validity_t_min;
  return b;
}

Theta1Result theta1(const MarketParams& p, double rho_const) {
  double th0 = theta0(p, rho_const);
  double sig = p.sigma, mu = p.mu;
  double c = p.penalty() * rho_const;
  Theta1Result r;
  r.term1 = -6.0 * (th0 - 1.0) / ((th0 + 1.0) * (th0 + 1.0));
  r.term2 = (1.0 + 2.0 * mu * c / (sig * sig)) * (th0 - 1.0) / (th0 + 1.0);
  r.term3 = -((th0 + 1.0) * (th0 + 1.0)) / ((th0 - 1.0) * (th0 - 1.0));
  double scale = sig * sig * sig * sig / (2.0 * c * std::abs(mu) * th0);
  r.value = scale * (r.term1 + r.term2 + r.term3);
  return r;
}

}  // namespace placekit::bm
