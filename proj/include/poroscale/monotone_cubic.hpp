#pragma once

#include <cstddef>
#include <vector>

namespace poroscale {

// Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Carlson
// limited slopes). Reproduces knots exactly and never overshoots the data on
// monotone segments, so monotone inputs stay monotone and band bounds are
// preserved.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  // x strictly increasing, same length as y, length >= 1.
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  // s must lie within [x.front(), x.back()].
  double eval(double s) const;
  double deriv(double s) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace poroscale
