#include "placekit/queue_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "placekit/numerics.hpp"

namespace placekit::queue {

DiscreteDist::DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty())
    throw std::invalid_argument("DiscreteDist: empty support");
  double sum = 0;
  for (double p : probs_) {
    if (p < 0) throw std::invalid_argument("DiscreteDist: negative mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("DiscreteDist: masses must sum to 1");
  for (double& p : probs_) p /= sum;
}

DiscreteDist DiscreteDist::point_mass(int value) {
  if (value < 1) throw std::invalid_argument("DiscreteDist: value >= 1");
  std::vector<double> p(value, 0.0);
  p[value - 1] = 1.0;
  return DiscreteDist(std::move(p));
}

DiscreteDist DiscreteDist::shifted_poisson(double lambda, double mass_tol) {
  if (!(lambda > 0)) throw std::invalid_argument("shifted_poisson: lambda > 0");
  std::vector<double> p;
  double cum = 0;
  for (long k = 0; k < 4000; ++k) {
    double w = num::poisson_pmf(k, lambda);
    p.push_back(w);
    cum += w;
    if (1.0 - cum < mass_tol && k > lambda) break;
  }
  // renormalize the truncated tail
  for (double& w : p) w /= cum;
  return DiscreteDist(std::move(p));
}

double DiscreteDist::pmf(int k) const {
  if (k < 1 || k > static_cast<int>(probs_.size())) return 0.0;
  return probs_[k - 1];
}

double DiscreteDist::mean() const {
  double m = 0;
  for (size_t i = 0; i < probs_.size(); ++i) m += (i + 1.0) * probs_[i];
  return m;
}

int DiscreteDist::truncation_index(double tail_tol) const {
  double cum = 0;
  for (size_t i = 0; i < probs_.size(); ++i) {
    cum += probs_[i];
    if (1.0 - cum <= tail_tol) return static_cast<int>(i + 1);
  }
  return static_cast<int>(probs_.size());
}

int DiscreteDist::sample(double uniform) const {
  double cum = 0;
  for (size_t i = 0; i < probs_.size(); ++i) {
    cum += probs_[i];
    if (uniform <= cum) return static_cast<int>(i + 1);
  }
  return static_cast<int>(probs_.size());
}

void QueueModel::validate() const {
  auto nonneg_finite = [](double v) { return std::isfinite(v) && v >= 0; };
  if (!nonneg_finite(lambda_a) || !nonneg_finite(lambda_b))
    throw std::invalid_argument("QueueModel: arrival rates must be >= 0");
  if (!(dep_a > 0) || !(dep_b > 0))
    throw std::invalid_argument("QueueModel: depletion rates must be > 0");
  for (double th : theta_k)
    if (!nonneg_finite(th))
      throw std::invalid_argument("QueueModel: theta_k must be >= 0");
  for (int q : depth_profile)
    if (q < 0) throw std::invalid_argument("QueueModel: negative depth");
  if (!(tick > 0)) throw std::invalid_argument("QueueModel: tick must be > 0");
  if (f_a.max_support() == 0)
    throw std::invalid_argument("QueueModel: f_a distribution required");
}

double QueueModel::theta_at(int k) const {
  if (k < 2 || theta_k.empty()) return 0.0;
  size_t idx = static_cast<size_t>(k - 2);
  if (idx >= theta_k.size()) return theta_k.back();
  return theta_k[idx];
}

int QueueModel::depth_at(int k) const {
  if (k < 1) return 0;
  size_t idx = static_cast<size_t>(k - 1);
  if (idx >= depth_profile.size()) return 0;
  return depth_profile[idx];
}

std::string QueueModel::to_json() const {
  nlohmann::json j;
  j["lambda_a"] = lambda_a;
  j["lambda_b"] = lambda_b;
  j["dep_a"] = dep_a;
  j["dep_b"] = dep_b;
  j["theta_k"] = theta_k;
  j["f_a"] = f_a.probs();
  j["depth_profile"] = depth_profile;
  j["tick"] = tick;
  return j.dump(2);
}

QueueModel QueueModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, true, true);
  static const char* known[] = {"lambda_a", "lambda_b", "dep_a",
                                "dep_b",    "theta_k",  "f_a",
                                "depth_profile", "tick"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok)
      throw std::invalid_argument("QueueModel: unknown key '" + it.key() + "'");
  }
  QueueModel q;
  q.lambda_a = j.at("lambda_a").get<double>();
  q.lambda_b = j.at("lambda_b").get<double>();
  q.dep_a = j.at("dep_a").get<double>();
  q.dep_b = j.at("dep_b").get<double>();
  if (j.contains("theta_k")) q.theta_k = j["theta_k"].get<std::vector<double>>();
  q.f_a = DiscreteDist(j.at("f_a").get<std::vector<double>>());
  if (j.contains("depth_profile"))
    q.depth_profile = j["depth_profile"].get<std::vector<int>>();
  if (j.contains("tick")) q.tick = j["tick"].get<double>();
  q.validate();
  return q;
}

QueueModel QueueModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("QueueModel: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void QueueModel::save_json_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("QueueModel: cannot write " + path);
  out << to_json() << "\n";
}

}  // namespace placekit::queue
