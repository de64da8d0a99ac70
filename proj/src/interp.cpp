#include "placekit/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace placekit {

Pchip::Pchip(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  size_t n = xs_.size();
  if (n < 2 || ys_.size() != n)
    throw std::invalid_argument("Pchip: need >= 2 nodes, matching sizes");
  for (size_t i = 1; i < n; ++i)
    if (!(xs_[i] > xs_[i - 1]))
      throw std::invalid_argument("Pchip: nodes must be strictly increasing");
  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs_[i + 1] - xs_[i];
    d[i] = (ys_[i + 1] - ys_[i]) / h[i];
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = d[0];
  } else {
    for (size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0) {
        slopes_[i] = 0.0;
      } else {
        double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
        slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    // one-sided ends (Fritsch-Butland style), clipped for monotonicity
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0) return 0.0;
      if (d0 * d1 < 0 && std::abs(s) > 3 * std::abs(d0)) return 3 * d0;
      return s;
    };
    slopes_[0] = end_slope(h[0], h[1], d[0], d[1]);
    slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }
}

int Pchip::interval(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  int i = static_cast<int>(it - xs_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(xs_.size()) - 2);
}

double Pchip::value(double x) const {
  int i = interval(x);
  double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  double h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t);
  double h11 = t * t * (t - 1);
  return h00 * ys_[i] + h10 * h * slopes_[i] + h01 * ys_[i + 1] +
         h11 * h * slopes_[i + 1];
}

double Pchip::derivative(double x) const {
  int i = interval(x);
  double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
  double dh00 = 6 * t * t - 6 * t;
  double dh10 = 3 * t * t - 4 * t + 1;
  double dh01 = -6 * t * t + 6 * t;
  double dh11 = 3 * t * t - 2 * t;
  return (dh00 * ys_[i] + dh01 * ys_[i + 1]) / h + dh10 * slopes_[i] +
         dh11 * slopes_[i + 1];
}

double Pchip::second_derivative(double x) const {
  int i = interval(x);
  double h = xs_[i + 1] - xs_[i], t = (x - xs_[i]) / h;
  double d2h00 = 12 * t - 6;
  double d2h10 = 6 * t - 4;
  double d2h01 = -12 * t + 6;
  double d2h11 = 6 * t - 2;
  return (d2h00 * ys_[i] + d2h01 * ys_[i + 1]) / (h * h) +
         (d2h10 * slopes_[i] + d2h11 * slopes_[i + 1]) / h;
}

}  // namespace placekit
