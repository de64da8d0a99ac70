#pragma once

#include <map>
#include <string>
#include <vector>

#include "placekit/types.hpp"

namespace placekit::queue {

// Discrete distribution on positive integers (queue sizes in batches).
class DiscreteDist {
 public:
  DiscreteDist() = default;
  // probs[k] is the probability of size k+1
  explicit DiscreteDist(std::vector<double> probs);
  static DiscreteDist point_mass(int value);
  // Poisson(lambda) shifted by +1; default surrogate for the refill size
  // distribution, mean = lambda + 1.
  static DiscreteDist shifted_poisson(double lambda, double mass_tol = 1e-12);

  double pmf(int k) const;  // k >= 1
  double mean() const;
  int max_support() const { return static_cast<int>(probs_.size()); }
  // smallest n with cumulative mass >= 1 - tail_tol
  int truncation_index(double tail_tol) const;
  int sample(double uniform) const;
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Poisson order-flow model of the book around the spread.  Rates are per
// second, sizes in batches.
struct QueueModel {
  double lambda_a = 0;  // limit-order arrival rate, best ask
  double lambda_b = 0;  // best bid
  double dep_a = 0;     // depletion rate mu_a + theta_{a,1}
  double dep_b = 0;     // mu_b + theta_{b,1}
  std::vector<double> theta_k;      // cancellation rate at k ticks, k >= 2
  DiscreteDist f_a;                 // refilled best-ask size distribution
  std::vector<int> depth_profile;   // Q^b at k ticks, k >= 1 (index 0 = k=1)
  double tick = 0.01;               // epsilon, price units

  void validate() const;
  double theta_at(int k) const;        // 0 when k < 2 or past the list
  int depth_at(int k) const;           // 0 beyond the profile

  std::string to_json() const;
  static QueueModel from_json(const std::string& text);
  static QueueModel from_json_file(const std::string& path);
  void save_json_file(const std::string& path) const;
};

// Price model whose first passage to the order level starts the race.
struct HittingModel {
  enum class Kind { bachelier, black_scholes };
  Kind kind = Kind::bachelier;
  MarketParams params;  // day units; the engine converts to seconds
};

}  // namespace placekit::queue
