#pragma once

#include <vector>

namespace placekit {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).  Shape
// preserving, C1; evaluation clamps to the end intervals for arguments
// outside the node range.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> xs, std::vector<double> ys);

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  bool empty() const { return xs_.empty(); }

 private:
  int interval(double x) const;
  std::vector<double> xs_, ys_, slopes_;
};

}  // namespace placekit
