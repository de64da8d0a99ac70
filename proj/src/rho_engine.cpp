#include "placekit/rho_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "placekit/numerics.hpp"

namespace placekit::queue {

namespace {

double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// First-passage setup in the model's own units (days for MarketParams).
struct HitSpec {
  double level;  // x (BM) or y (GBM)
  double drift;  // mu or mu - sigma^2/2
  double vol;
  double log_den;  // ln P(tau < t)
};

double log_hit_prob(double level, double drift, double vol, double log_w_extra,
                    double t) {
  double st = vol * std::sqrt(t);
  double za = (-level - drift * t) / st;
  double zb = (-level + drift * t) / st;
  // reflection weight e^{-2 level drift / vol^2} in log space
  return log_sum_exp(num::log_normal_cdf(za),
                     -2.0 * level * drift / (vol * vol) + log_w_extra +
                         num::log_normal_cdf(zb));
}

HitSpec make_hit(const HittingModel& h, double depth, double t) {
  h.params.validate();
  if (!(depth > 0) || !(t > 0))
    throw std::invalid_argument("hitting_density: depth, t must be > 0");
  HitSpec hs;
  hs.vol = h.params.sigma;
  if (h.kind == HittingModel::Kind::bachelier) {
    hs.level = depth;
    hs.drift = h.params.mu;
    hs.log_den = log_hit_prob(depth, hs.drift, hs.vol, 0.0, t);
  } else {
    hs.level = depth;  // log-depth y
    hs.drift = h.params.mu - 0.5 * h.params.sigma * h.params.sigma;
    // e^{-2 y m / s^2} = e^{-2 y mu / s^2 + y}
    hs.log_den = log_hit_prob(depth, hs.drift, hs.vol, 0.0, t);
  }
  double z = depth / (hs.vol * std::sqrt(t));
  if (z > 3e7)
    throw std::runtime_error(
        "hitting_density: P(tau < t) underflow; depth too far for this horizon");
  return hs;
}

double log_hit_num(const HitSpec& hs, double s) {
  double arg = (hs.level + hs.drift * s) / (hs.vol * std::sqrt(s));
  return std::log(hs.level) - std::log(hs.vol) - 1.5 * std::log(s) -
         0.5 * arg * arg - std::log(num::kSqrt2Pi);
}

}  // namespace

double hitting_density(const HittingModel& h, double depth, double t,
                       double s) {
  if (!(s > 0) || !(s < t))
    throw std::invalid_argument("hitting_density: requires 0 < s < t");
  HitSpec hs = make_hit(h, depth, t);
  double lg = log_hit_num(hs, s) - hs.log_den;
  return lg < -745.0 ? 0.0 : std::exp(lg);
}

double log_hit_probability(const HittingModel& h, double depth, double t) {
  return make_hit(h, depth, t).log_den;
}

double depletion_density_ask(const QueueModel& q, int i, double s) {
  if (i < 1) throw std::invalid_argument("depletion_density_ask: i >= 1");
  if (s < 0) throw std::invalid_argument("depletion_density_ask: s >= 0");
  double dep = q.dep_a, lam = q.lambda_a;
  if (s == 0) return i == 1 ? dep : 0.0;
  if (lam < 1e-14) {
    // pure-death queue: Gamma(i, dep)
    double lg = (i - 1) * std::log(s) - s * dep + i * std::log(dep) -
                std::lgamma(i);
    return lg < -745.0 ? 0.0 : std::exp(lg);
  }
  double z = 2.0 * std::sqrt(lam * dep) * s;
  double bi = num::bessel_i_scaled(i, z);
  if (bi <= 0.0) return 0.0;
  double srt = std::sqrt(lam) - std::sqrt(dep);
  double lg = std::log(static_cast<double>(i)) - std::log(s) +
              0.5 * i * std::log(dep / lam) - s * srt * srt + std::log(bi);
  return lg < -745.0 ? 0.0 : std::exp(lg);
}

double depletion_density_bid(const QueueModel& q, int l, double s) {
  if (l < 1) throw std::invalid_argument("depletion_density_bid: l >= 1");
  if (s < 0) throw std::invalid_argument("depletion_density_bid: s >= 0");
  if (s == 0) return l == 1 ? q.dep_b : 0.0;
  double lg = (l - 1) * std::log(s) - s * q.dep_b + l * std::log(q.dep_b) -
              std::lgamma(l);
  return lg < -745.0 ? 0.0 : std::exp(lg);
}

double bid_depletion_cdf(const QueueModel& q, int l, double s) {
  return num::gamma_cdf_int(l, q.dep_b, s);
}

double alpha_race(const QueueModel& q, double u, int i, int l,
                  const num::QuadratureSpec& spec) {
  if (i < 1 || l < 1) throw std::invalid_argument("alpha_race: i, l >= 1");
  if (u < 0) throw std::invalid_argument("alpha_race: u >= 0");
  if (u == 0) return 0.0;
  auto fg = [&](double s) {
    return bid_depletion_cdf(q, l, s) * depletion_density_ask(q, i, s);
  };
  double won_before_ask = num::integrate(fg, 0.0, u, spec);
  auto ga = [&](double s) { return depletion_density_ask(q, i, s); };
  double ask_done = num::integrate(ga, 0.0, u, spec);
  double val = won_before_ask +
               bid_depletion_cdf(q, l, u) * std::max(0.0, 1.0 - ask_done);
  return std::clamp(val, 0.0, 1.0);
}

double rho_limit_0plus(const QueueModel& q, int i, int l,
                       const num::QuadratureSpec& spec) {
  if (i < 1 || l < 1) throw std::invalid_argument("rho_limit_0plus: i, l >= 1");
  auto fg = [&](double s) {
    return bid_depletion_cdf(q, l, s) * depletion_density_ask(q, i, s);
  };
  double won = num::integrate_to_inf(fg, 0.0, spec);
  auto ga = [&](double s) { return depletion_density_ask(q, i, s); };
  double total = num::integrate_to_inf(ga, 0.0, spec);
  // the ask queue may never deplete (supercritical arrivals); the bid
  // always wins on that event
  double defect = std::max(0.0, 1.0 - total);
  return std::clamp(won + defect, 0.0, 1.0);
}

double rho_limit_0plus(const QueueModel& q, const DiscreteDist& i_dist, int l,
                       const num::QuadratureSpec& spec) {
  int imax = i_dist.truncation_index(1e-6);
  double out = 0;
  for (int i = 1; i <= imax; ++i) {
    double w = i_dist.pmf(i);
    if (w > 0) out += w * rho_limit_0plus(q, i, l, spec);
  }
  return std::clamp(out, 0.0, 1.0);
}

double cancellations_ahead(const QueueModel& q, int k, double s, int j) {
  int qb = q.depth_at(k);
  if (j < 0 || j > qb)
    throw std::invalid_argument("cancellations_ahead: j outside [0, Q^b(0)]");
  double mean = q.theta_at(k) * s;
  if (j < qb) return num::poisson_pmf(j, mean);
  return num::poisson_tail(qb, mean);
}

// ---- precomputed race tables ----

namespace {

struct RaceTable {
  double t = 0;
  int imax = 0, lmax = 0, m = 0;
  std::vector<double> us;     // m+1 nodes, quadratic stretch toward 0
  std::vector<double> alpha;  // [(i-1)*lmax + (l-1)]*(m+1) + j

  double at(int i, int l, double u) const {
    if (u <= 0) return 0.0;
    if (u >= t) u = t;
    double w = m * std::sqrt(u / t);
    int j0 = std::min(static_cast<int>(w), m - 1);
    double u0 = us[j0], u1 = us[j0 + 1];
    double g = (u - u0) / (u1 - u0);
    const double* base = &alpha[((i - 1) * lmax + (l - 1)) *
                                static_cast<size_t>(m + 1)];
    return base[j0] + g * (base[j0 + 1] - base[j0]);
  }
};

RaceTable build_race_table(const QueueModel& q, double t, int imax, int lmax,
                           int m = 700) {
  RaceTable rt;
  rt.t = t;
  rt.imax = imax;
  rt.lmax = lmax;
  rt.m = m;
  rt.us.resize(m + 1);
  for (int j = 0; j <= m; ++j) {
    double w = static_cast<double>(j) / m;
    rt.us[j] = t * w * w;
  }
  // nodes and midpoints: p[0..2m], p[2j] = us[j]
  int np = 2 * m + 1;
  std::vector<double> ps(np);
  for (int j = 0; j < m; ++j) {
    ps[2 * j] = rt.us[j];
    ps[2 * j + 1] = 0.5 * (rt.us[j] + rt.us[j + 1]);
  }
  ps[2 * m] = rt.us[m];

  // g_a^i at every point, all orders in one pass per point
  std::vector<double> ga(static_cast<size_t>(imax) * np);
  double dep = q.dep_a, lam = q.lambda_a;
  bool pure_death = lam < 1e-14;
  double srt = pure_death ? 0.0 : std::sqrt(lam) - std::sqrt(dep);
  double half_log_ratio = pure_death ? 0.0 : 0.5 * std::log(dep / lam);
  std::vector<double> bi(imax + 1);
  for (int pidx = 0; pidx < np; ++pidx) {
    double s = ps[pidx];
    if (s == 0) {
      for (int i = 1; i <= imax; ++i)
        ga[(i - 1) * static_cast<size_t>(np) + pidx] = (i == 1) ? dep : 0.0;
      continue;
    }
    if (pure_death) {
      for (int i = 1; i <= imax; ++i)
        ga[(i - 1) * static_cast<size_t>(np) + pidx] =
            depletion_density_ask(q, i, s);
      continue;
    }
    double z = 2.0 * std::sqrt(lam * dep) * s;
    num::bessel_i_scaled_batch(z, bi);
    double log_base = -s * srt * srt - std::log(s);
    for (int i = 1; i <= imax; ++i) {
      double v = bi[i];
      double lg = log_base + i * half_log_ratio +
                  std::log(static_cast<double>(i));
      ga[(i - 1) * static_cast<size_t>(np) + pidx] =
          (v <= 0 || lg + std::log(v) < -745.0) ? 0.0 : std::exp(lg) * v;
    }
  }

  // F_b^l at every point
  std::vector<double> fb(static_cast<size_t>(lmax) * np);
  for (int l = 1; l <= lmax; ++l)
    for (int pidx = 0; pidx < np; ++pidx)
      fb[(l - 1) * static_cast<size_t>(np) + pidx] =
          num::gamma_cdf_int(l, q.dep_b, ps[pidx]);

  rt.alpha.assign(static_cast<size_t>(imax) * lmax * (m + 1), 0.0);
  std::vector<double> cum_ga(m + 1);
  for (int i = 1; i <= imax; ++i) {
    const double* g = &ga[(i - 1) * static_cast<size_t>(np)];
    cum_ga[0] = 0;
    for (int j = 0; j < m; ++j) {
      double hstep = rt.us[j + 1] - rt.us[j];
      cum_ga[j + 1] = cum_ga[j] + hstep / 6.0 *
                                      (g[2 * j] + 4.0 * g[2 * j + 1] +
                                       g[2 * j + 2]);
    }
    for (int l = 1; l <= lmax; ++l) {
      const double* F = &fb[(l - 1) * static_cast<size_t>(np)];
      double* a = &rt.alpha[((i - 1) * static_cast<size_t>(lmax) + (l - 1)) *
                            (m + 1)];
      double cum = 0;
      a[0] = 0;
      for (int j = 0; j < m; ++j) {
        double hstep = rt.us[j + 1] - rt.us[j];
        cum += hstep / 6.0 *
               (F[2 * j] * g[2 * j] + 4.0 * F[2 * j + 1] * g[2 * j + 1] +
                F[2 * j + 2] * g[2 * j + 2]);
        double v = cum + F[2 * j + 2] * std::max(0.0, 1.0 - cum_ga[j + 1]);
        a[j + 1] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return rt;
}

}  // namespace

struct RhoEngine::Impl {
  QueueModel q;
  HittingModel h;
  double t;  // seconds
  int imax = 0;
  RaceTable table;

  Impl(QueueModel q_, HittingModel h_, double t_)
      : q(std::move(q_)), h(h_), t(t_) {
    q.validate();
    if (!(t > 0)) throw std::invalid_argument("RhoEngine: t must be > 0");
    imax = q.f_a.truncation_index(1e-6);
    int lmax = 1;
    for (int qd : q.depth_profile) lmax = std::max(lmax, qd + 1);
    table = build_race_table(q, t, imax, lmax);
  }

  // rho at the best bid: race mixed over the stationary refill size
  double rho_best_bid() const {
    int qb1 = q.depth_at(1);
    double out = 0;
    for (int i = 1; i <= imax; ++i) {
      double w = q.f_a.pmf(i);
      if (w > 0) out += w * table.at(i, qb1 + 1, t);
    }
    return std::clamp(out, 0.0, 1.0);
  }

  double value(double depth) const {
    if (!(depth > 0))
      throw std::invalid_argument("rho: depth must be > 0");
    int k = static_cast<int>(std::lround(depth / q.tick));
    if (depth < 1.5 * q.tick || k < 2) return rho_best_bid();
    int qb = q.depth_at(k);
    double theta = q.theta_at(k);

    // hitting machinery runs in day units
    double t_days = t / kSecondsPerDay;
    double level = depth;
    if (h.kind == HittingModel::Kind::black_scholes) {
      if (!(depth < h.params.s0))
        throw std::invalid_argument("rho: depth must be below s0");
      level = -std::log1p(-depth / h.params.s0);
    }
    HitSpec hs = make_hit(h, level, t_days);

    std::vector<double> fa(imax + 1, 0.0);
    for (int i = 1; i <= imax; ++i) fa[i] = q.f_a.pmf(i);

    std::vector<double> pj(qb + 1);
    auto integrand = [&](double s_sec) {
      double s_days = s_sec / kSecondsPerDay;
      if (s_days <= 0 || s_days >= t_days) return 0.0;
      double lg = log_hit_num(hs, s_days) - hs.log_den;
      if (lg < -700.0) return 0.0;
      double dens = std::exp(lg) / kSecondsPerDay;  // per second
      double mean = theta * s_sec;
      for (int j = 0; j < qb; ++j) pj[j] = num::poisson_pmf(j, mean);
      pj[qb] = num::poisson_tail(qb, mean);
      double u = t - s_sec;
      double sum = 0;
      for (int i = 1; i <= imax; ++i) {
        if (fa[i] <= 0) continue;
        double inner = 0;
        for (int j = 0; j <= qb; ++j) {
          if (pj[j] <= 0) continue;
          inner += pj[j] * table.at(i, qb - j + 1, u);
        }
        sum += fa[i] * inner;
      }
      return dens * sum;
    };

    num::QuadratureSpec spec;
    spec.abs_tol = 2e-8;
    spec.rel_tol = 1e-6;
    spec.max_subdivisions = 600;
    // for deep levels the conditional hitting density concentrates in a
    // sliver of width ~ 2 sigma^2 t^2 / x^2 below s = t; seed the panels
    // at that scale so the adaptive rule cannot miss the spike
    double sig_sec = h.params.sigma / std::sqrt(kSecondsPerDay);
    double spike = 2.0 * sig_sec * sig_sec * t * t / (level * level);
    std::vector<double> cuts = {0.0, 1e-4 * t, 1e-2 * t, 0.1 * t, 0.5 * t};
    std::vector<double> upper;
    for (double w = std::max(spike, 1e-9 * t); w < 0.5 * t; w *= 5.0)
      upper.push_back(t - w);
    upper.push_back(t);
    std::sort(upper.begin(), upper.end());
    for (double u : upper)
      if (u > cuts.back()) cuts.push_back(u);
    double total = 0;
    for (size_t c = 0; c + 1 < cuts.size(); ++c)
      total += num::integrate(integrand, cuts[c], cuts[c + 1], spec);
    return std::clamp(total, 0.0, 1.0);
  }
};

RhoEngine::RhoEngine(QueueModel q, HittingModel h, double t_seconds)
    : impl_(std::make_unique<Impl>(std::move(q), h, t_seconds)) {}
RhoEngine::~RhoEngine() = default;
RhoEngine::RhoEngine(RhoEngine&&) noexcept = default;
double RhoEngine::value(double depth) const { return impl_->value(depth); }
double RhoEngine::horizon() const { return impl_->t; }

double rho(const QueueModel& q, const HittingModel& h, double depth,
           double t) {
  RhoEngine eng(q, h, t);
  return eng.value(depth);
}

double rho_0plus_of_t(const QueueModel& q, double t, int qa0, int qb0) {
  if (qa0 < 0 || qb0 < 0)
    throw std::invalid_argument("rho_0plus_of_t: qa0, qb0 >= 0");
  if (t == 0) return 0.0;
  // zero orders at the ask: the next arrival refills it; treat as size 1
  int i = std::max(qa0, 1);
  return alpha_race(q, t, i, qb0 + 1);
}

ConditionReport condition_probe(const QueueModel& q, const HittingModel& h,
                                double t) {
  q.validate();
  ConditionReport rep;
  double spd = kSecondsPerDay;
  double sig_sec = h.params.sigma / std::sqrt(spd);
  rep.bound_2gb_sigma2_t2 = 2.0 * q.dep_b * sig_sec * sig_sec * t * t;

  RhoEngine eng(q, h, t);
  int tail_k = static_cast<int>(q.depth_profile.size()) + 2;
  double x_start = std::max(2.0, static_cast<double>(tail_k)) * q.tick;
  double x_ceiling = std::max({6.0 * std::sqrt(2.0 * q.dep_b) * sig_sec * t,
                               8.0 * x_start, 20.0 * sig_sec * std::sqrt(t)});
  double s0 = h.params.s0;
  bool is_gbm = h.kind == HittingModel::Kind::black_scholes;
  if (is_gbm) x_ceiling = std::min(x_ceiling, 0.5 * s0);

  rep.tail_x2rho_min = std::numeric_limits<double>::infinity();
  rep.tail_y2rho_min = std::numeric_limits<double>::infinity();
  rep.max_tail_dx_rho = -std::numeric_limits<double>::infinity();
  double last_x2rho = 0;
  for (double x = x_start; x <= x_ceiling * 1.0001; x *= 1.5) {
    rep.probe_xs.push_back(x);
    double hstep = 0.02 * x;
    double rp = eng.value(x + hstep), rm = eng.value(x - hstep);
    double dxr = (rp - rm) / (2.0 * hstep);
    rep.max_tail_dx_rho = std::max(rep.max_tail_dx_rho, dxr);
    double r = eng.value(x);
    last_x2rho = x * x * r;
    rep.tail_x2rho_min = std::min(rep.tail_x2rho_min, last_x2rho);
    if (is_gbm) {
      double y = -std::log1p(-x / s0);
      rep.tail_y2rho_min =
          std::min(rep.tail_y2rho_min, std::exp(y) * y * y * r);
    }
  }
  rep.slope_ok = rep.max_tail_dx_rho <= 1e-4;
  double tail_val = is_gbm ? std::min(last_x2rho, rep.tail_y2rho_min)
                           : last_x2rho;
  rep.tail_bound_ok = tail_val >= 0.9 * rep.bound_2gb_sigma2_t2;

  for (double tp : {5.0, 10.0, 30.0, 60.0, 90.0}) {
    if (tp > 2.0 * t && tp > 90.0) break;
    RhoEngine e2(q, h, tp);
    double d = e2.value(2.0 * q.tick) - e2.value(q.tick);
    rep.d_proxy.emplace_back(tp, d);
  }
  return rep;
}

ConditionReport condition_probe(const ExecProbability& rho, double x_ceiling,
                                double t) {
  ConditionReport rep;
  rep.max_tail_dx_rho = -std::numeric_limits<double>::infinity();
  rep.tail_x2rho_min = std::numeric_limits<double>::infinity();
  for (double x = x_ceiling / 256.0; x <= x_ceiling * 1.0001; x *= 1.5) {
    rep.probe_xs.push_back(x);
    rep.max_tail_dx_rho = std::max(rep.max_tail_dx_rho, rho.dx(x, t));
    rep.tail_x2rho_min =
        std::min(rep.tail_x2rho_min, x * x * rho.value(x, t));
  }
  rep.slope_ok = rep.max_tail_dx_rho <= 1e-4;
  return rep;
}

ExecProbability make_exec_probability(const QueueModel& q,
                                      const HittingModel& h,
                                      const std::vector<double>& ts_days,
                                      int max_ticks) {
  if (ts_days.empty())
    throw std::invalid_argument("make_exec_probability: horizons required");
  if (max_ticks < 2)
    throw std::invalid_argument("make_exec_probability: max_ticks >= 2");
  std::vector<double> ts = ts_days;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.size() == 1) {
    double t0 = ts[0];
    ts = {0.8 * t0, t0, 1.2 * t0};
  }
  std::vector<double> xs(max_ticks);
  for (int k = 1; k <= max_ticks; ++k) xs[k - 1] = k * q.tick;
  std::vector<double> vals(xs.size() * ts.size());
  for (size_t j = 0; j < ts.size(); ++j) {
    RhoEngine eng(q, h, ts[j] * kSecondsPerDay);
    for (size_t i = 0; i < xs.size(); ++i)
      vals[i * ts.size() + j] = eng.value(xs[i]);
  }
  return ExecProbability::tabulated(std::move(xs), std::move(ts),
                                    std::move(vals));
}

}  // namespace placekit::queue
