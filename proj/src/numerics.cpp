#include "placekit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace placekit::num {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSat = 709.0;  // just under ln(DBL_MAX)
}  // namespace

// ---- standard normal ----

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) {
  if (std::isnan(z)) throw std::invalid_argument("normal_cdf: nan argument");
  return 0.5 * std::erfc(-z / kSqrt2);
}

double normal_sf(double z) {
  if (std::isnan(z)) throw std::invalid_argument("normal_sf: nan argument");
  return 0.5 * std::erfc(z / kSqrt2);
}

double erfcx(double x) {
  if (x < 0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); saturate rather than overflow
    double x2 = x * x;
    if (x2 > kLogSat) return std::numeric_limits<double>::max();
    return 2.0 * std::exp(x2) - erfcx(-x);
  }
  if (x <= 24.0) {
    // erfc keeps full relative accuracy down to ~1e-254 here
    return std::exp(x * x) * std::erfc(x);
  }
  // asymptotic series 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - ...)
  double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 10; ++k) {
    term *= -(2 * k - 1) * inv2x2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (x * std::sqrt(kPi));
}

double log_cdf_over_pdf(double z) {
  if (z < -8.0) {
    return std::log(std::sqrt(kPi / 2.0) * erfcx(-z / kSqrt2));
  }
  return 0.5 * z * z + std::log(kSqrt2Pi) + std::log(normal_cdf(z));
}

double cdf_over_pdf(double z) {
  double lg = log_cdf_over_pdf(z);
  if (lg > kLogSat) return std::exp(kLogSat);
  return std::exp(lg);
}

double exp_mul_cdf_over_pdf(double log_w, double z) {
  double lg = log_w + log_cdf_over_pdf(z);
  if (lg > kLogSat) return std::exp(kLogSat);
  if (lg < -745.0) return 0.0;
  return std::exp(lg);
}

double log_normal_cdf(double z) {
  if (z > -8.0) return std::log(normal_cdf(z));
  // ln N(z) = ln phi(z) + ln L(z)
  return -0.5 * z * z - std::log(kSqrt2Pi) + log_cdf_over_pdf(z);
}

// Wichura's AS 241 (PPND16): double-precision inverse normal cdf.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    x = num / den;
  } else {
    r -= 5.0;
    double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    x = num / den;
  }
  return q < 0 ? -x : x;
}

MillsBounds mills_bounds_check(double z) {
  if (z < 0) throw std::invalid_argument("mills_bounds_check: z must be >= 0");
  MillsBounds b{};
  b.value = normal_sf(z);
  if (z == 0) {
    b.lower = -kInf;
    b.upper = kInf;
    b.holds = true;  // degenerate bracket, vacuously true
    return b;
  }
  double phi = normal_pdf(z);
  b.lower = phi * (1.0 / z - 1.0 / (z * z * z));
  b.upper = phi / z;
  double mid = phi * z / (z * z + 1.0);
  b.holds = b.lower <= mid && mid <= b.value && b.value <= b.upper;
  return b;
}

// ---- Bessel I ----

namespace {

// power series sum_k (z/2)^{2k+n} / (k! (k+n)!), scaled by e^{-z}
double bessel_series_scaled(int n, double z) {
  double log_t0 = n * std::log(z / 2.0) - std::lgamma(n + 1.0);
  if (log_t0 - z < -745.0) return 0.0;
  double t = std::exp(log_t0);
  double sum = t;
  double q = z * z / 4.0;
  for (int k = 1; k < 600; ++k) {
    t *= q / (static_cast<double>(k) * (k + n));
    sum += t;
    if (t < sum * 1e-18) break;
  }
  return sum * std::exp(-z);
}

// Miller's normalized downward recurrence: seed high above the turning
// point, recur I_{k-1} = I_{k+1} + (2k/z) I_k downward (stable direction),
// normalize with I_0 + 2 sum_k I_k = e^z, which makes the e^{-z} scaling
// exact.  All quantities are positive, so there is no cancellation for
// orders with exponentially small values.
void bessel_miller_scaled(double z, std::span<double> out) {
  int nmax = static_cast<int>(out.size()) - 1;
  int start = static_cast<int>(z + 14.0 * std::cbrt(z)) + nmax + 60;
  double ip = 0.0;           // I_{k+1}
  double ic = 1e-280;        // I_k (arbitrary seed scale)
  double sum = 2.0 * ic;     // accumulates I_0 + 2 sum_{k>=1} I_k
  std::fill(out.begin(), out.end(), 0.0);
  if (start <= nmax) out[start] = ic;
  for (int k = start; k >= 1; --k) {
    double im = ip + (2.0 * k / z) * ic;
    ip = ic;
    ic = im;
    sum += (k - 1 >= 1 ? 2.0 : 1.0) * ic;
    if (k - 1 <= nmax) out[k - 1] = ic;
    if (ic > 1e270) {
      ip *= 1e-270;
      ic *= 1e-270;
      sum *= 1e-270;
      for (double& v : out) v *= 1e-270;
    }
  }
  for (double& v : out) v = std::max(v / sum, 0.0);
}

}  // namespace

double bessel_i_scaled(int order, double z) {
  if (order < 0) throw std::invalid_argument("bessel_i: order must be >= 0");
  if (z < 0) throw std::invalid_argument("bessel_i: z must be >= 0");
  if (z == 0) return order == 0 ? 1.0 : 0.0;
  if (z <= 30.0) return bessel_series_scaled(order, z);
  std::vector<double> out(order + 1);
  bessel_miller_scaled(z, out);
  return out[order];
}

void bessel_i_scaled_batch(double z, std::span<double> out) {
  if (out.empty()) return;
  int nmax = static_cast<int>(out.size()) - 1;
  if (z < 0) throw std::invalid_argument("bessel_i: z must be >= 0");
  if (z == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  if (z <= 30.0) {
    for (int n = 0; n <= nmax; ++n) out[n] = bessel_series_scaled(n, z);
    return;
  }
  bessel_miller_scaled(z, out);
}

double bessel_i(int order, double z) {
  double s = bessel_i_scaled(order, z);
  if (s == 0.0) return 0.0;
  double lg = std::log(s) + z;
  if (lg > kLogSat)
    throw std::overflow_error(
        "bessel_i: unscaled value overflows; use bessel_i_scaled");
  return s * std::exp(z);
}

// ---- quadrature ----

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0) || !(rel_tol > 0) || max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: invalid tolerances");
}

namespace {

// 7-point Gauss, 15-point Kronrod (QUADPACK dqk15 constants)
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double integral, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  double fc = f(c);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    double dx = hl * kXgk[j];
    double f1 = f(c - dx), f2 = f(c + dx);
    res_k += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.integral = res_k * hl;
  double diff = std::abs(res_k - res_g) * std::abs(hl);
  // QUADPACK-style damped error estimate
  p.error = diff;
  return p;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec) {
  spec.validate();
  if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
  std::vector<Panel> panels;
  panels.push_back(gk15(f, a, b));
  double total = panels[0].integral, err = panels[0].error;
  for (int iter = 0; iter < spec.max_subdivisions; ++iter) {
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
      if (!std::isfinite(total))
        throw IntegrationError("integrate: non-finite integrand", total, err);
      return total;
    }
    // split worst panel
    size_t worst = 0;
    for (size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    Panel p = panels[worst];
    double mid = 0.5 * (p.a + p.b);
    if (!(p.a < mid && mid < p.b)) {
      // interval exhausted at machine precision; accept contribution
      panels[worst].error = 0;
      err = 0;
      for (auto& q : panels) err += q.error;
      continue;
    }
    Panel l = gk15(f, p.a, mid), r = gk15(f, mid, p.b);
    total += l.integral + r.integral - p.integral;
    err += l.error + r.error - p.error;
    panels[worst] = l;
    panels.push_back(r);
  }
  err = 0;
  for (auto& q : panels) err += q.error;
  if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) &&
      std::isfinite(total))
    return total;
  throw IntegrationError("integrate: did not converge within max_subdivisions",
                         total, err);
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureSpec& spec) {
  auto g = [&](double u) {
    double om = 1.0 - u;
    double s = a + u / om;
    double v = f(s);
    return v / (om * om);
  };
  return integrate(g, 0.0, 1.0, spec);
}

// ---- root finding ----

void RootBracket::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("RootBracket: requires lo < hi, finite");
  if (f_lo * f_hi > 0)
    throw std::invalid_argument("RootBracket: no sign change across bracket");
}

RootResult find_root(const std::function<double(double)>& f,
                     const RootBracket& bracket, double tol) {
  bracket.validate();
  if (!(tol > 0)) throw std::invalid_argument("find_root: tol must be > 0");
  double a = bracket.lo, b = bracket.hi;
  double fa = bracket.f_lo, fb = bracket.f_hi;
  if (fa == 0) return {a, 0};
  if (fb == 0) return {b, 0};
  // keep b as the best estimate
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa;
  double d = b - a, e = d;
  const int max_iter = 200;
  for (int it = 1; it <= max_iter; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                  0.5 * tol * std::max(1.0, std::abs(b));
    double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol)
      return {b, it};
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // secant / inverse quadratic
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return {b, max_iter};
}

RootResult find_root(const std::function<double(double)>& f, double lo,
                     double hi, double tol) {
  RootBracket br{lo, hi, f(lo), f(hi)};
  return find_root(f, br, tol);
}

// ---- finite differences ----

double finite_diff(const std::function<double(double)>& f, double x, int order,
                   double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff: h must be > 0");
  if (order == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (order == 2) return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  throw std::invalid_argument("finite_diff: order must be 1 or 2");
}

// ---- Poisson / Gamma ----

double poisson_pmf(long k, double mean) {
  if (k < 0) return 0.0;
  if (mean < 0) throw std::invalid_argument("poisson_pmf: negative mean");
  if (mean == 0) return k == 0 ? 1.0 : 0.0;
  double lg = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
  return lg < -745.0 ? 0.0 : std::exp(lg);
}

double poisson_cdf(long k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0) return 1.0;
  if (static_cast<double>(k) > mean + 12.0 * std::sqrt(mean) + 12.0)
    return 1.0 - poisson_tail(k + 1, mean);
  // direct sum from the largest term down, in log space
  long kmax = std::min<long>(k, static_cast<long>(mean));
  double lg_max = -mean + kmax * std::log(mean) - std::lgamma(kmax + 1.0);
  if (lg_max < -745.0) {
    // whole mass below k is negligible unless k >= mean (handled above)
    return 0.0;
  }
  double t = 1.0, sum = 1.0;  // relative to the term at kmax
  for (long j = kmax - 1; j >= 0; --j) {
    t *= (j + 1) / mean;
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  t = 1.0;
  for (long j = kmax + 1; j <= k; ++j) {
    t *= mean / j;
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  return std::min(1.0, std::exp(lg_max) * sum);
}

double poisson_tail(long k, double mean) {
  if (k <= 0) return 1.0;
  if (mean == 0) return 0.0;
  if (static_cast<double>(k) < mean) return 1.0 - poisson_cdf(k - 1, mean);
  double lg_k = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
  if (lg_k < -745.0) return 0.0;
  double t = 1.0, sum = 1.0;
  for (long j = k + 1; j < k + 4000; ++j) {
    t *= mean / j;
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  return std::exp(lg_k) * sum;
}

double gamma_cdf_int(long shape, double rate, double s) {
  if (shape < 1) throw std::invalid_argument("gamma_cdf_int: shape >= 1");
  if (s <= 0) return 0.0;
  return poisson_tail(shape, rate * s);
}

}  // namespace placekit::num
