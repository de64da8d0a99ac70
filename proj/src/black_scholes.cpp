#include "placekit/black_scholes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "placekit/numerics.hpp"

namespace placekit::gbm {

using num::cdf_over_pdf;
using num::exp_mul_cdf_over_pdf;
using num::log_normal_cdf;
using num::normal_cdf;
using num::normal_pdf;

namespace {

void check_inputs(const MarketParams& p, double y, double t,
                  bool allow_zero_y) {
  p.validate();
  if (!std::isfinite(y) || !std::isfinite(t))
    throw std::invalid_argument("black_scholes: non-finite input");
  if (!(t > 0)) throw std::invalid_argument("black_scholes: t must be > 0");
  if (!allow_zero_y && !(y > 0))
    throw std::invalid_argument("black_scholes: y must be > 0");
}

// Standardized arguments of the GBM cost formulas.
struct Args {
  double st;             // sigma sqrt(t)
  double d, fh, eh, gh;  // (-y-a_-t)/st, (-y+a_-t)/st, (-y+a_+t)/st, (y+a_+t)/st
  double m, ap;          // a_- = mu - sigma^2/2, a_+ = mu + sigma^2/2
  double lw1, lw2;       // log reflection weights: -2y a_-/s^2, -2y a_+/s^2
};

Args make_args(const MarketParams& p, double y, double t) {
  Args a;
  a.st = p.sigma * std::sqrt(t);
  a.m = p.mu - 0.5 * p.sigma * p.sigma;
  a.ap = p.mu + 0.5 * p.sigma * p.sigma;
  a.d = (-y - a.m * t) / a.st;
  a.fh = (-y + a.m * t) / a.st;
  a.eh = (-y + a.ap * t) / a.st;
  a.gh = (y + a.ap * t) / a.st;
  double s2 = p.sigma * p.sigma;
  a.lw1 = -2.0 * y * a.m / s2;
  a.lw2 = -2.0 * y * a.ap / s2;
  return a;
}

// exp(log_w) * N(z) in log space
double expw_cdf(double log_w, double z) {
  double lg = log_w + log_normal_cdf(z);
  return lg < -745.0 ? 0.0 : std::exp(std::min(lg, 709.0));
}

}  // namespace

double cost(const MarketParams& p, const ExecProbability& rho, double y,
            double t) {
  check_inputs(p, y, t, false);
  Args a = make_args(p, y, t);
  double c = p.penalty();
  double r = rho.value(y, t);
  double hit = normal_cdf(a.d) + expw_cdf(a.lw1, a.fh);  // P(min <= -y)
  double level = p.s0 * std::exp(-y);
  double grow = p.s0 * (expw_cdf(p.mu * t, a.gh) -
                        expw_cdf(a.lw2 + p.mu * t, a.eh));
  return (level - c * r) * hit + grow + p.fee - p.s0;
}

double dC_dy(const MarketParams& p, const ExecProbability& rho, double y,
             double t) {
  check_inputs(p, y, t, false);
  Args a = make_args(p, y, t);
  double sig = p.sigma, s2 = sig * sig, c = p.penalty();
  double r = rho.value(y, t);
  double level = p.s0 * std::exp(-y);
  double en_f = expw_cdf(a.lw1, a.fh);          // e^{-2ym/s2} N(fh)
  double en_e = expw_cdf(a.lw2 + p.mu * t, a.eh);  // e^{-2y a_+/s2 + mu t} N(eh)
  double A = -level * (2.0 * p.mu / s2) - c * r * (1.0 - 2.0 * p.mu / s2);
  double B = p.s0 * (1.0 + 2.0 * p.mu / s2);
  double out = 2.0 * c * r * normal_pdf(a.d) / a.st + A * en_f + B * en_e -
               level * normal_cdf(a.d);
  double ry = rho.dx(y, t);
  if (ry != 0.0) out -= c * ry * (normal_cdf(a.d) + en_f);
  return out;
}

double d2C_dy2(const MarketParams& p, const ExecProbability& rho, double y,
               double t) {
  check_inputs(p, y, t, false);
  Args a = make_args(p, y, t);
  double sig = p.sigma, s2 = sig * sig, c = p.penalty();
  double r = rho.value(y, t);
  double ry = rho.dx(y, t), ryy = rho.dxx(y, t);
  double level = p.s0 * std::exp(-y);
  double phid = normal_pdf(a.d);
  double en_f = expw_cdf(a.lw1, a.fh);
  double en_e = expw_cdf(a.lw2 + p.mu * t, a.eh);
  double A = -level * (2.0 * p.mu / s2) - c * r * (1.0 - 2.0 * p.mu / s2);
  double B = p.s0 * (1.0 + 2.0 * p.mu / s2);
  double k = 1.0 - 2.0 * p.mu / s2;

  double out = (2.0 * c / a.st) * (ry * phid + r * a.d * phid / a.st);
  out += (level * (2.0 * p.mu / s2) - c * ry * k + A * k) * en_f -
         A * phid / a.st;
  out += -B * (1.0 + 2.0 * p.mu / s2) * en_e -
         B * std::exp(-y) * phid / a.st;
  out += level * normal_cdf(a.d) + level * phid / a.st;
  if (ryy != 0.0) out -= c * ryy * (normal_cdf(a.d) + en_f);
  if (ry != 0.0) out -= c * ry * (-2.0 * phid / a.st + k * en_f);
  return out;
}

double dC_dy_at0(const MarketParams& p, const ExecProbability& rho, double t) {
  check_inputs(p, 0.0, t, true);
  GbmArgs g = GbmArgs::from(p);
  double sq = std::sqrt(t), sig = p.sigma, c = p.penalty();
  double r0 = rho.value(0.0, t);
  double fn = normal_pdf(g.alpha * sq) + g.alpha * sq * normal_cdf(g.alpha * sq);
  return (2.0 * c * r0 / (sig * sq)) * fn -
         p.s0 * (1.0 + (2.0 * g.alpha / sig) * normal_cdf(g.alpha * sq) -
                 (2.0 * g.beta / sig) * std::exp(p.mu * t) *
                     normal_cdf(g.beta * sq)) -
         c * rho.dx(0.0, t);
}

double d2C_dtdy_at0(const MarketParams& p, const ExecProbability& rho,
                    double t) {
  check_inputs(p, 0.0, t, true);
  GbmArgs g = GbmArgs::from(p);
  double sq = std::sqrt(t), sig = p.sigma, c = p.penalty();
  double r0 = rho.value(0.0, t);
  double fn = normal_pdf(g.alpha * sq) + g.alpha * sq * normal_cdf(g.alpha * sq);
  // the d_t rho(0,t) term vanishes under the usual constant-in-t rho(0+)
  return p.s0 * (2.0 * p.mu / (sig * sq)) * normal_pdf(g.alpha * sq) +
         (2.0 * p.s0 * g.beta / sig) * p.mu * std::exp(p.mu * t) *
             normal_cdf(g.beta * sq) -
         (c * r0 / (sig * t * sq)) * normal_pdf(g.alpha * sq) +
         (2.0 * c / (sig * sq)) * fn * rho.dt(0.0, t) - c * rho.dtx(0.0, t);
}

double d2C_dy2_at0(const MarketParams& p, const ExecProbability& rho,
                   double t) {
  check_inputs(p, 0.0, t, true);
  GbmArgs g = GbmArgs::from(p);
  double sq = std::sqrt(t), sig = p.sigma, s2 = sig * sig, c = p.penalty();
  double r0 = rho.value(0.0, t);
  double ry = rho.dx(0.0, t), ryy = rho.dxx(0.0, t);
  double na = normal_cdf(g.alpha * sq);
  double fn = normal_pdf(g.alpha * sq) + g.alpha * sq * na;
  double out = p.s0 * (2.0 * p.mu / s2) * (2.0 * p.mu / s2) * na -
               (4.0 * p.s0 * g.beta * g.beta / s2) * std::exp(p.mu * t) *
                   normal_cdf(g.beta * sq) +
               p.s0 * normal_cdf(-g.alpha * sq) -
               (4.0 * g.alpha / (s2 * sq)) * r0 * c * fn;
  out += (4.0 * c * ry / (sig * sq)) * fn - c * ryy;
  return out;
}

double dC_dy_scaled(const MarketParams& p, const ExecProbability& rho,
                    double y, double t) {
  check_inputs(p, y, t, false);
  Args a = make_args(p, y, t);
  double sig = p.sigma, s2 = sig * sig, c = p.penalty();
  double r = rho.value(y, t);
  double l_f = cdf_over_pdf(a.fh);
  double w_f = exp_mul_cdf_over_pdf(-y, a.fh);  // e^{-y} N(fh)/phi(fh)
  double w_e = exp_mul_cdf_over_pdf(-y, a.eh);
  double w_d = exp_mul_cdf_over_pdf(-y, a.d);
  double B = p.s0 * (1.0 + 2.0 * p.mu / s2);
  double out = 2.0 * c * r / a.st - p.s0 * (2.0 * p.mu / s2) * w_f -
               c * r * (1.0 - 2.0 * p.mu / s2) * l_f + B * w_e - p.s0 * w_d;
  double ry = rho.dx(y, t);
  if (ry != 0.0) out -= c * ry * (cdf_over_pdf(a.d) + l_f);
  return out;
}

double d2C_dy2_scaled(const MarketParams& p, const ExecProbability& rho,
                      double y, double t) {
  check_inputs(p, y, t, false);
  Args a = make_args(p, y, t);
  double sig = p.sigma, s2 = sig * sig, c = p.penalty();
  double r = rho.value(y, t);
  double ry = rho.dx(y, t), ryy = rho.dxx(y, t);
  double ey = std::exp(-y);
  double level = p.s0 * ey;
  double l_f = cdf_over_pdf(a.fh);
  double w_f = exp_mul_cdf_over_pdf(-y, a.fh);
  double w_e = exp_mul_cdf_over_pdf(-y, a.eh);
  double w_d = exp_mul_cdf_over_pdf(-y, a.d);
  double A = -level * (2.0 * p.mu / s2) - c * r * (1.0 - 2.0 * p.mu / s2);
  double B = p.s0 * (1.0 + 2.0 * p.mu / s2);
  double k = 1.0 - 2.0 * p.mu / s2;

  double out = 2.0 * c * ry / a.st + 2.0 * c * r * a.d / (a.st * a.st);
  out += p.s0 * (2.0 * p.mu / s2) * w_f - c * ry * k * l_f +
         A * k * l_f - A / a.st;
  out += -B * (1.0 + 2.0 * p.mu / s2) * w_e - B * ey / a.st;
  out += p.s0 * w_d + level / a.st;
  if (ryy != 0.0) out -= c * ryy * (cdf_over_pdf(a.d) + l_f);
  if (ry != 0.0) out -= c * ry * (-2.0 / a.st + k * l_f);
  return out;
}

GbmPlacement optimal_y(const MarketParams& p, const ExecProbability& rho,
                       double t, const SolverOptions& opt) {
  check_inputs(p, 0.0, t, true);
  GbmPlacement sol;
  double g0 = dC_dy_at0(p, rho, t);
  double trivial_cost = p.fee - rho.value(0.0, t) * p.penalty();
  // existence condition report (informational)
  {
    double a = (p.mu > -0.5 * p.sigma * p.sigma) ? 2.0 : 1.0;
    double rhs = a * p.s0 * std::abs(p.mu) * t / std::max(p.penalty(), 1e-300);
    if (p.mu < 0 && !(rho.value(0.0, t) < rhs))
      sol.diagnostics = "existence condition rho(0+,t) < a s0 |mu| t/(r+f) not met";
  }
  if (g0 >= 0.0) {
    sol.y_star = 0.0;
    sol.price_level = p.s0;
    sol.cost = trivial_cost;
    sol.boundary_case = PlacementSolution::Boundary::trivial_zero;
    if (g0 == 0.0) sol.diagnostics = "interior-degenerate: dC/dy(0+,t) = 0";
    return sol;
  }

  double sq = std::sqrt(t);
  double slope_cap = -p.mu + 1.5 * p.sigma * p.sigma;
  double ceiling = opt.ceiling_factor * (std::max(slope_cap, 0.0) * t +
                                         6.0 * p.sigma * sq);
  ceiling = std::min(ceiling, opt.y_max);
  double lo = 1e-9 * p.sigma * sq;
  auto g = [&](double y) { return dC_dy_scaled(p, rho, y, t); };
  double f_lo = g(lo);
  if (f_lo >= 0.0) {
    sol.y_star = 0.0;
    sol.price_level = p.s0;
    sol.cost = trivial_cost;
    sol.boundary_case = PlacementSolution::Boundary::trivial_zero;
    sol.diagnostics = "sign change below resolvable depth";
    return sol;
  }
  // the derivative can cross zero several times (a shallow minimum near
  // t0* and a deep one under the far-field plateau); walk a geometric
  // grid, refine every minimum crossing, and keep the requested branch
  double best_y = 0, best_cost = std::numeric_limits<double>::infinity();
  int iters = 0, found = 0;
  double prev_y = lo, prev_f = f_lo;
  num::RootBracket used{};
  // a restricted search targets a narrow bracket; walk it finely
  double factor = std::isfinite(opt.y_max) ? 1.03 : 1.12;
  for (double y = lo * 1.5; prev_y < ceiling; y *= factor) {
    y = std::min(y, ceiling);
    double f = g(y);
    ++iters;
    if (prev_f < 0.0 && f >= 0.0) {
      num::RootBracket br{prev_y, y, prev_f, f};
      num::RootResult res = num::find_root(g, br, opt.root_tol);
      double c = cost(p, rho, res.x, t);
      ++found;
      if (c < best_cost) {
        best_cost = c;
        best_y = res.x;
        used = br;
        iters += res.iterations;
      }
      if (opt.branch == SolverOptions::Branch::first_min) break;
    }
    prev_y = y;
    prev_f = f;
    if (y >= ceiling) break;
  }
  if (found == 0) {
    sol.y_star = std::numeric_limits<double>::infinity();
    sol.price_level = 0.0;
    sol.cost = std::numeric_limits<double>::quiet_NaN();
    sol.boundary_case = PlacementSolution::Boundary::unbounded_flag;
    std::ostringstream os;
    os << "no sign change of dC/dy below ceiling " << ceiling;
    sol.diagnostics = os.str();
    return sol;
  }
  sol.y_star = best_y;
  sol.price_level = p.s0 * std::exp(-best_y);
  sol.cost = best_cost;
  sol.bracket_used = used;
  sol.iterations = iters;
  sol.boundary_case = PlacementSolution::Boundary::interior;
  if (d2C_dy2_scaled(p, rho, best_y, t) < 0)
    sol.diagnostics = "second-order condition violated at located root";
  return sol;
}

CriticalTime critical_time(const MarketParams& p, const ExecProbability& rho,
                           double root_tol) {
  p.validate();
  if (!(p.mu < 0)) throw std::domain_error("critical_time: requires mu < 0");
  if (!(p.penalty() > 0))
    throw std::domain_error("critical_time: requires r + f > 0");
  CriticalTime out;
  double c = p.penalty(), r0 = rho.rho0();
  out.bar_t = r0 * c / (2.0 * std::abs(p.mu) * p.s0);
  out.tilde_t = 2.0 * out.bar_t;
  bool strongly_neg = p.mu <= -0.5 * p.sigma * p.sigma;  // a = 1 regime
  double t_up = strongly_neg ? out.tilde_t : out.bar_t;

  auto g = [&](double t) { return dC_dy_at0(p, rho, t); };
  double t_lo = t_up * 1e-10;
  double f_lo = g(t_lo), f_hi = g(t_up);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    std::ostringstream os;
    os << "critical_time: no sign change of dC/dy(0+,t) on (0, upper]: f("
       << t_lo << ")=" << f_lo << ", f(" << t_up << ")=" << f_hi;
    throw std::runtime_error(os.str());
  }
  num::RootBracket br{t_lo, t_up, f_lo, f_hi};
  num::RootResult res = num::find_root(g, br, root_tol);
  out.t0_star = res.x;
  out.iterations = res.iterations;

  // lower bound
  GbmArgs ga = GbmArgs::from(p);
  double z = strongly_neg
                 ? p.mu * num::normal_pdf(0.0)
                 : p.mu * num::normal_pdf(0.0) -
                       ga.beta * std::sqrt(-p.mu / 2.0) * std::exp(-0.5);
  double m = ga.alpha_minus;
  double disc = m * m - 32.0 * p.sigma * p.sigma * num::normal_pdf(0.0) *
                            p.s0 * z / (r0 * c);
  if (disc >= 0.0) {
    double u = (-m - std::sqrt(disc)) / (8.0 * p.sigma * p.s0 * z);
    out.lower = r0 * c * r0 * c * u * u;
    out.lower_valid = true;
  } else {
    out.lower = 0.0;
    out.lower_valid = false;
  }
  out.ordering_ok = out.lower < out.t0_star && out.t0_star < t_up;
  return out;
}

NearT0Approx approx_ystar_near_t0(const MarketParams& p,
                                  const ExecProbability& rho, double t,
                                  bool use_bar_t) {
  if (!(p.mu < 0))
    throw std::domain_error("approx_ystar_near_t0: requires mu < 0");
  CriticalTime ct = critical_time(p, rho);
  double t0 = use_bar_t ? ct.bar_t : ct.t0_star;
  if (t < t0)
    throw std::domain_error("approx_ystar_near_t0: requires t >= t0*");

  double dyy = d2C_dy2_at0(p, rho, t0);
  if (!(dyy > 0))
    throw std::runtime_error("approx_ystar_near_t0: d2C/dy2(0,t0*) <= 0");
  double dty = d2C_dtdy_at0(p, rho, t0);
  double r1 = -dty / dyy;

  double hy = 1e-5 * p.sigma * std::sqrt(t0);
  double ht = 1e-5 * t0;
  double d3y = (-3.0 * dyy + 4.0 * d2C_dy2(p, rho, hy, t0) -
                d2C_dy2(p, rho, 2.0 * hy, t0)) /
               (2.0 * hy);
  double d3ty2 =
      (d2C_dy2_at0(p, rho, t0 + ht) - d2C_dy2_at0(p, rho, t0 - ht)) /
      (2.0 * ht);
  double d3t2y =
      (d2C_dtdy_at0(p, rho, t0 + ht) - d2C_dtdy_at0(p, rho, t0 - ht)) /
      (2.0 * ht);
  double r2 = -(0.5 * d3y * r1 * r1 + d3ty2 * r1 + 0.5 * d3t2y) / dyy;

  NearT0Approx out;
  double dt = t - t0;
  out.rho1 = r1;
  out.rho2 = r2;
  out.t0_used = t0;
  out.first_order = r1 * dt;
  out.second_order = r1 * dt + r2 * dt * dt;
  return out;
}

LargeT ystar_large_t(const MarketParams& p, double rho_const, double t) {
  p.validate();
  if (!(p.mu < 0)) throw std::domain_error("ystar_large_t: requires mu < 0");
  (void)rho_const;
  LargeT out;
  double root = std::sqrt(-2.0 * p.mu + 2.0 * p.sigma * p.sigma);
  out.limit_slope = -p.mu + 1.5 * p.sigma * p.sigma - p.sigma * root;
  out.second_order_value =
      out.limit_slope + (p.sigma / (2.0 * root)) * std::log(t) / t;
  return out;
}

SmallSigma ystar_small_sigma(const MarketParams& p, double rho_const,
                             double sigma, double t) {
  p.validate();
  if (!(p.mu < 0)) throw std::domain_error("ystar_small_sigma: requires mu < 0");
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::domain_error("ystar_small_sigma: requires sigma in (0,1)");
  double c = rho_const * p.penalty();
  if (!(c > 0)) throw std::domain_error("ystar_small_sigma: rho (r+f) > 0");
  SmallSigma out;
  double lg = std::log(1.0 / sigma);
  double root = std::sqrt(2.0 * sigma * sigma * t * lg);
  out.a_const = std::log(p.s0) + p.mu * t + 0.5 * std::log(t) -
                std::log(c) + 0.5 * std::log(2.0 * num::kPi);
  out.first_order = -p.mu * t - root;
  out.approx = out.first_order + (out.a_const / (2.0 * lg)) * root;
  return out;
}

}  // namespace placekit::gbm
