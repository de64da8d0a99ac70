#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

// Self-contained numerical kernel: normal-distribution functions with
// reliable far tails, modified Bessel functions of the first kind,
// adaptive Gauss-Kronrod quadrature, a bracketed hybrid root finder,
// and small helpers (finite differences, Poisson/Gamma tails).
// Everything here is pure and re-entrant.

namespace placekit::num {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// ---- standard normal ----

double normal_pdf(double z);
double normal_cdf(double z);   // N(z)
double normal_sf(double z);    // 1 - N(z)
double normal_quantile(double p);  // inverse of normal_cdf, p in (0,1)
double log_normal_cdf(double z);   // ln N(z), stable far into the left tail

// exp(x^2) * erfc(x); stable for large positive x
double erfcx(double x);

// cdf_over_pdf(z) = N(z)/phi(z).  The workhorse ratio for evaluating
// e^{...}N(...) products without overflow/underflow.  Saturates near
// DBL_MAX instead of overflowing for very large positive z.
double cdf_over_pdf(double z);
double log_cdf_over_pdf(double z);
// exp(log_w) * N(z)/phi(z), combined in log space
double exp_mul_cdf_over_pdf(double log_w, double z);

// Mills-ratio sandwich phi(z)(1/z - 1/z^3) <= phi(z) z/(z^2+1) <= N(-z) <= phi(z)/z.
struct MillsBounds {
  double lower;   // phi(z)(1/z - 1/z^3); -inf at z = 0
  double upper;   // phi(z)/z; +inf at z = 0
  double value;   // N(-z)
  bool holds;     // sandwich (including the z/(z^2+1) refinement) verified
};
MillsBounds mills_bounds_check(double z);  // requires z >= 0

// ---- modified Bessel I ----

// I_n(z), n >= 0 integer, z >= 0.  Throws std::overflow_error when the
// unscaled value is not representable; use the scaled variant instead.
double bessel_i(int order, double z);
// e^{-z} I_n(z); never overflows.
double bessel_i_scaled(int order, double z);
// out[k] = e^{-z} I_k(z) for k = 0..out.size()-1, one pass over z.
void bessel_i_scaled_batch(double z, std::span<double> out);

// ---- quadrature ----

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  void validate() const;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double best, double err)
      : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
  double best_estimate;
  double error_estimate;
};

// Adaptive bisection with an embedded 7/15-point Gauss-Kronrod rule per
// panel.  Integrable endpoint behaviour (e.g. s^{-1/2}) is handled by the
// subdivision; non-convergence throws IntegrationError carrying the best
// estimate.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec = {});
// Integral over [a, inf), mapped by s = a + u/(1-u).
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureSpec& spec = {});

// ---- root finding ----

struct RootBracket {
  double lo = 0, hi = 0;
  double f_lo = 0, f_hi = 0;
  void validate() const;  // lo < hi, f_lo * f_hi <= 0
};

struct RootResult {
  double x = 0;
  int iterations = 0;
};

// Bracketed hybrid: secant / inverse-quadratic step accepted only inside
// the bracket, bisection otherwise.  Converges for any continuous f with a
// sign change.  Stops when |f| <= tol or width <= tol * max(1, |x|).
RootResult find_root(const std::function<double(double)>& f,
                     const RootBracket& bracket, double tol = 1e-10);
RootResult find_root(const std::function<double(double)>& f, double lo,
                     double hi, double tol = 1e-10);

// ---- finite differences ----

// Central difference estimate of f' (order 1) or f'' (order 2) at x.
double finite_diff(const std::function<double(double)>& f, double x, int order,
                   double h);

// ---- Poisson / Gamma helpers ----

double poisson_pmf(long k, double mean);
double poisson_cdf(long k, double mean);   // P(X <= k)
double poisson_tail(long k, double mean);  // P(X >= k)
// P(Gamma(shape, rate) <= s) for integer shape >= 1
double gamma_cdf_int(long shape, double rate, double s);

}  // namespace placekit::num
