#include "placekit/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "placekit/parallel.hpp"
#include "placekit/rng.hpp"

namespace placekit::sim {

void SimConfig::validate(double t) const {
  if (n_paths < 2) throw std::invalid_argument("SimConfig: n_paths >= 2");
  if (!(dt > 0)) throw std::invalid_argument("SimConfig: dt > 0");
  if (dt > t / 100.0)
    throw std::invalid_argument("SimConfig: dt must be <= t/100");
}

namespace {

constexpr long kBlock = 8192;

// Deterministic parallel MC driver: per-sample streams, per-block partial
// sums combined pairwise in block order.
template <typename Fn>
McEstimate run_mc(long n_samples, std::uint64_t seed, Fn&& sample) {
  long n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<double> sums(n_blocks, 0.0), sums2(n_blocks, 0.0);
  parallel_for_blocks(static_cast<int>(n_blocks), [&](int b) {
    long lo = static_cast<long>(b) * kBlock;
    long hi = std::min(lo + kBlock, n_samples);
    double s = 0, s2 = 0;
    for (long i = lo; i < hi; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      double v = sample(rng);
      s += v;
      s2 += v * v;
    }
    sums[b] = s;
    sums2[b] = s2;
  });
  double S = pairwise_sum(sums), S2 = pairwise_sum(sums2);
  McEstimate e;
  e.n = n_samples;
  e.mean = S / n_samples;
  double var = std::max(0.0, (S2 - n_samples * e.mean * e.mean) /
                                 (n_samples - 1.0));
  e.std_error = std::sqrt(var / n_samples);
  return e;
}

struct PathSetup {
  double drift, vol, level;
  int n_steps;
  double step;
};

PathSetup make_setup(const MarketParams& p, PriceModel model, double x_or_y,
                     double t, const SimConfig& cfg) {
  p.validate();
  if (!(x_or_y > 0) || !(t > 0) || !std::isfinite(x_or_y))
    throw std::invalid_argument("simulate: depth and t must be > 0");
  cfg.validate(t);
  PathSetup s;
  s.n_steps = static_cast<int>(std::ceil(t / cfg.dt));
  s.step = t / s.n_steps;
  s.vol = p.sigma;
  if (model == PriceModel::bachelier) {
    s.drift = p.mu;
    s.level = -x_or_y;
  } else {
    s.drift = p.mu - 0.5 * p.sigma * p.sigma;
    s.level = -x_or_y;  // log-price level
  }
  return s;
}

// Walk one path given pre-drawn normals; bridge-corrected touch indicator
// plus the terminal value.
struct PathOutcome {
  bool touched;
  double terminal;
};

PathOutcome walk(const PathSetup& ps, const double* z, double sign,
                 CounterRng& rng) {
  double s = 0;
  bool touched = false;
  double sq = std::sqrt(ps.step) * ps.vol;
  double var_inv = 1.0 / (ps.vol * ps.vol * ps.step);
  for (int k = 0; k < ps.n_steps; ++k) {
    double s_new = s + ps.drift * ps.step + sq * sign * z[k];
    if (!touched) {
      if (s_new <= ps.level) {
        touched = true;
      } else {
        double a = s - ps.level, b = s_new - ps.level;
        double pc = std::exp(-2.0 * a * b * var_inv);
        if (rng.next_uniform() < pc) touched = true;
      }
    }
    s = s_new;
  }
  return {touched, s};
}

}  // namespace

McEstimate simulate_cost_continuous(const MarketParams& p,
                                    const ExecProbability& rho,
                                    PriceModel model, double x_or_y, double t,
                                    const SimConfig& cfg) {
  PathSetup ps = make_setup(p, model, x_or_y, t, cfg);
  double rho_xt = rho.value(x_or_y, t);
  double x_abs = model == PriceModel::bachelier
                     ? x_or_y
                     : p.s0 * (1.0 - std::exp(-x_or_y));
  auto path_cost = [&](CounterRng& rng, const double* z, double sign) {
    PathOutcome o = walk(ps, z, sign, rng);
    if (o.touched) {
      bool executed = rng.next_uniform() < rho_xt;
      return executed ? (-x_abs - p.rebate) : (-x_abs + p.fee);
    }
    double st_minus_s0 = model == PriceModel::bachelier
                             ? o.terminal
                             : p.s0 * (std::exp(o.terminal) - 1.0);
    return st_minus_s0 + p.fee;
  };

  long n_units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  if (n_units < 2) throw std::invalid_argument("simulate: too few paths");
  return run_mc(n_units, cfg.seed, [&](CounterRng& rng) {
    thread_local std::vector<double> z;
    z.resize(ps.n_steps);
    for (int k = 0; k < ps.n_steps; ++k) z[k] = rng.next_normal();
    double c = path_cost(rng, z.data(), 1.0);
    if (!cfg.antithetic) return c;
    double c2 = path_cost(rng, z.data(), -1.0);
    return 0.5 * (c + c2);
  });
}

McEstimate simulate_touch_probability(const MarketParams& p, PriceModel model,
                                      double x_or_y, double t,
                                      const SimConfig& cfg) {
  PathSetup ps = make_setup(p, model, x_or_y, t, cfg);
  return run_mc(cfg.n_paths, cfg.seed, [&](CounterRng& rng) {
    thread_local std::vector<double> z;
    z.resize(ps.n_steps);
    for (int k = 0; k < ps.n_steps; ++k) z[k] = rng.next_normal();
    return walk(ps, z.data(), 1.0, rng).touched ? 1.0 : 0.0;
  });
}

namespace {

long sample_poisson(double mean, CounterRng& rng) {
  if (mean <= 0) return 0;
  if (mean < 60.0) {
    double limit = std::exp(-mean), prod = rng.next_uniform();
    long k = 0;
    while (prod > limit) {
      prod *= rng.next_uniform();
      ++k;
    }
    return k;
  }
  // split large means
  long half = sample_poisson(mean / 2, rng);
  return half + sample_poisson(mean - mean / 2, rng);
}

// true iff the bid queue (l) depletes before the ask queue (i) and before w
bool race_once(const queue::QueueModel& q, int i, int l, double w,
               CounterRng& rng) {
  double na = i, nb = l;
  double time = 0;
  while (true) {
    double rb = nb > 0 ? q.dep_b : 0.0;
    double ra_d = na > 0 ? q.dep_a : 0.0;
    double ra_b = na > 0 ? q.lambda_a : 0.0;
    double total = rb + ra_d + ra_b;
    if (total <= 0) return false;
    time += rng.next_exponential(total);
    if (time >= w) return false;
    double u = rng.next_uniform() * total;
    if (u < rb) {
      if (--nb == 0) return true;
    } else if (u < rb + ra_d) {
      if (--na == 0) return false;
    } else {
      ++na;
    }
  }
}

}  // namespace

DiscreteCostResult simulate_cost_discrete(const MarketParams& p,
                                          const queue::QueueModel& q,
                                          PriceModel model, double x, double t,
                                          double delta, double eps,
                                          const SimConfig& cfg) {
  p.validate();
  q.validate();
  if (!(eps > 0) || !(delta > 0))
    throw std::invalid_argument("simulate_cost_discrete: eps, delta > 0");
  double k_real = x / eps;
  long k_level = std::lround(k_real);
  if (k_level < 1 || std::abs(k_real - k_level) > 1e-9)
    throw std::invalid_argument(
        "simulate_cost_discrete: x must be a positive multiple of eps");
  if (cfg.n_paths < 2)
    throw std::invalid_argument("simulate_cost_discrete: n_paths >= 2");
  double drift =
      model == PriceModel::bachelier ? p.mu : p.mu - 0.5 * p.sigma * p.sigma;
  double p_up = std::clamp(0.5 * (1.0 + drift * delta / eps), 0.0, 1.0);
  int qb0 = q.depth_at(static_cast<int>(k_level));
  double theta = q.theta_at(static_cast<int>(k_level));
  // time is in days for the walk, seconds for the queue race
  long level_tick = 1 - k_level;

  long n_touch = 0, n_exec = 0, n_rebuy = 0;
  auto one = [&](CounterRng& rng, int* flags) {
    double time = 0;
    long pos = 0;
    double touch_time = -1, next_change = -1;
    if (level_tick == 0) {
      touch_time = 0;
      next_change = rng.next_exponential(1.0 / delta);
    } else {
      while (true) {
        double gap = rng.next_exponential(1.0 / delta);
        if (time + gap > t) break;
        time += gap;
        pos += (rng.next_uniform() < p_up) ? 1 : -1;
        if (pos == level_tick) {
          touch_time = time;
          next_change = time + rng.next_exponential(1.0 / delta);
          break;
        }
      }
    }
    if (touch_time < 0) return pos * eps + p.fee;  // never reached the level
    flags[0] = 1;
    double window_end = std::min(t, next_change);
    double w_sec = (window_end - touch_time) * kSecondsPerDay;
    long j = std::min<long>(sample_poisson(theta * touch_time * kSecondsPerDay, rng),
                            qb0);
    int l = static_cast<int>(qb0 - j + 1);
    int i = q.f_a.sample(rng.next_uniform());
    bool executed = race_once(q, i, l, w_sec, rng);
    if (executed) {
      flags[1] = 1;
      return -x - p.rebate;
    }
    if (next_change <= t) {
      flags[2] = 1;
      return -x + p.fee + 2.0 * eps;  // cancel and rebuy one tick above
    }
    return -x + eps + p.fee;  // price parked at the level through t
  };

  long n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;
  std::vector<double> sums(n_blocks, 0), sums2(n_blocks, 0);
  std::vector<long> touches(n_blocks, 0), execs(n_blocks, 0),
      rebuys(n_blocks, 0);
  parallel_for_blocks(static_cast<int>(n_blocks), [&](int b) {
    long lo = static_cast<long>(b) * kBlock;
    long hi = std::min(lo + kBlock, cfg.n_paths);
    double s = 0, s2 = 0;
    long tn = 0, en = 0, rn = 0;
    for (long idx = lo; idx < hi; ++idx) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(idx));
      int flags[3] = {0, 0, 0};
      double v = one(rng, flags);
      s += v;
      s2 += v * v;
      tn += flags[0];
      en += flags[1];
      rn += flags[2];
    }
    sums[b] = s;
    sums2[b] = s2;
    touches[b] = tn;
    execs[b] = en;
    rebuys[b] = rn;
  });
  double S = pairwise_sum(sums), S2 = pairwise_sum(sums2);
  for (long v : touches) n_touch += v;
  for (long v : execs) n_exec += v;
  for (long v : rebuys) n_rebuy += v;

  DiscreteCostResult out;
  out.cost.n = cfg.n_paths;
  out.cost.mean = S / cfg.n_paths;
  double var = std::max(
      0.0, (S2 - cfg.n_paths * out.cost.mean * out.cost.mean) /
               (cfg.n_paths - 1.0));
  out.cost.std_error = std::sqrt(var / cfg.n_paths);
  out.touch_fraction = static_cast<double>(n_touch) / cfg.n_paths;
  out.exec_given_touch =
      n_touch > 0 ? static_cast<double>(n_exec) / n_touch : 0.0;
  out.case_rebuy_fraction = static_cast<double>(n_rebuy) / cfg.n_paths;
  return out;
}

McEstimate simulate_queue_race(const queue::QueueModel& q, double u, int i,
                               int l, const SimConfig& cfg) {
  q.validate();
  if (i < 1 || l < 1)
    throw std::invalid_argument("simulate_queue_race: i, l >= 1");
  if (u < 0) throw std::invalid_argument("simulate_queue_race: u >= 0");
  return run_mc(cfg.n_paths, cfg.seed, [&](CounterRng& rng) {
    return race_once(q, i, l, u, rng) ? 1.0 : 0.0;
  });
}

namespace {

// one conditional hitting time (days), rejection over whole paths
double sample_tau_days(const queue::HittingModel& h, double level, double t_days,
                       double dt, CounterRng& rng) {
  double drift = h.kind == queue::HittingModel::Kind::bachelier
                     ? h.params.mu
                     : h.params.mu - 0.5 * h.params.sigma * h.params.sigma;
  double vol = h.params.sigma;
  int n_steps = static_cast<int>(std::ceil(t_days / dt));
  double step = t_days / n_steps;
  double sq = vol * std::sqrt(step);
  double var_inv = 1.0 / (vol * vol * step);
  for (int attempt = 0; attempt < 200000; ++attempt) {
    double s = 0;
    for (int k = 0; k < n_steps; ++k) {
      double s_new = s + drift * step + sq * rng.next_normal();
      if (s_new <= -level) return (k + rng.next_uniform()) * step;
      double a = s + level, b = s_new + level;
      if (rng.next_uniform() < std::exp(-2.0 * a * b * var_inv))
        return (k + rng.next_uniform()) * step;
      s = s_new;
    }
  }
  throw std::runtime_error(
      "simulate_rho: hitting acceptance rate too low for this depth/horizon");
}

}  // namespace

McEstimate simulate_rho(const queue::QueueModel& q, const queue::HittingModel& h,
                        double depth, double t, const SimConfig& cfg) {
  q.validate();
  if (!(depth > 0) || !(t > 0))
    throw std::invalid_argument("simulate_rho: depth, t > 0");
  int k = static_cast<int>(std::lround(depth / q.tick));
  if (depth < 1.5 * q.tick || k < 2) {
    int qb1 = q.depth_at(1);
    return run_mc(cfg.n_paths, cfg.seed, [&](CounterRng& rng) {
      int i = q.f_a.sample(rng.next_uniform());
      return race_once(q, i, qb1 + 1, t, rng) ? 1.0 : 0.0;
    });
  }
  double level = depth;
  if (h.kind == queue::HittingModel::Kind::black_scholes)
    level = -std::log1p(-depth / h.params.s0);
  double t_days = t / kSecondsPerDay;
  cfg.validate(t_days);
  int qb0 = q.depth_at(k);
  double theta = q.theta_at(k);
  return run_mc(cfg.n_paths, cfg.seed, [&](CounterRng& rng) {
    double tau_sec = sample_tau_days(h, level, t_days, cfg.dt, rng) *
                     kSecondsPerDay;
    long j = std::min<long>(sample_poisson(theta * tau_sec, rng), qb0);
    int l = static_cast<int>(qb0 - j + 1);
    int i = q.f_a.sample(rng.next_uniform());
    return race_once(q, i, l, t - tau_sec, rng) ? 1.0 : 0.0;
  });
}

std::vector<double> sample_hitting_times(const queue::HittingModel& h,
                                         double depth, double t_seconds,
                                         long n, const SimConfig& cfg) {
  double level = depth;
  if (h.kind == queue::HittingModel::Kind::black_scholes)
    level = -std::log1p(-depth / h.params.s0);
  double t_days = t_seconds / kSecondsPerDay;
  cfg.validate(t_days);
  std::vector<double> out(n);
  long n_blocks = (n + kBlock - 1) / kBlock;
  parallel_for_blocks(static_cast<int>(n_blocks), [&](int b) {
    long lo = static_cast<long>(b) * kBlock, hi = std::min(lo + kBlock, n);
    for (long i = lo; i < hi; ++i) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i));
      out[i] = sample_tau_days(h, level, t_days, cfg.dt, rng) * kSecondsPerDay;
    }
  });
  return out;
}

}  // namespace placekit::sim
