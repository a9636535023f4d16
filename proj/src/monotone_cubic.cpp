#include "poroscale/monotone_cubic.hpp"

#include <algorithm>
#include <cmath>

#include "poroscale/errors.hpp"

namespace poroscale {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// One-sided three-point end slope with the classic shape limits.
double end_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(m) != sign(d0)) return 0.0;
  if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return m;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n == 0 || y_.size() != n) throw ConfigError("interp-knots", "empty or mismatched knot arrays");
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(x_[k] < x_[k + 1])) throw ConfigError("interp-knots", "knots must be strictly increasing");

  m_.assign(n, 0.0);
  if (n == 1) return;
  if (n == 2) {
    m_[0] = m_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
    return;
  }

  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    d[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) {
      m_[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      m_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }
  m_[0] = end_slope(h[0], h[1], d[0], d[1]);
  m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double MonotoneCubic::eval(double s) const {
  if (x_.size() == 1) return y_[0];
  // One-ulp slack at the range edges; genuine extrapolation still throws.
  const double tol = 1e-12 * std::max(1.0, std::abs(x_.front()) + std::abs(x_.back()));
  if (s < x_.front() - tol || s > x_.back() + tol)
    throw HorizonError("extrapolation", "lookup outside the sampled range");
  s = std::clamp(s, x_.front(), x_.back());
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), s) - x_.begin());
  k = k == 0 ? 0 : k - 1;
  if (k + 1 >= x_.size()) k = x_.size() - 2;

  const double hk = x_[k + 1] - x_[k];
  const double t = (s - x_[k]) / hk;
  const double t2 = t * t, t3 = t2 * t;
  return y_[k] * (2.0 * t3 - 3.0 * t2 + 1.0) + hk * m_[k] * (t3 - 2.0 * t2 + t) +
         y_[k + 1] * (-2.0 * t3 + 3.0 * t2) + hk * m_[k + 1] * (t3 - t2);
}

double MonotoneCubic::deriv(double s) const {
  if (x_.size() == 1) return 0.0;
  const double tol = 1e-12 * std::max(1.0, std::abs(x_.front()) + std::abs(x_.back()));
  if (s < x_.front() - tol || s > x_.back() + tol)
    throw HorizonError("extrapolation", "lookup outside the sampled range");
  s = std::clamp(s, x_.front(), x_.back());
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), s) - x_.begin());
  k = k == 0 ? 0 : k - 1;
  if (k + 1 >= x_.size()) k = x_.size() - 2;

  const double hk = x_[k + 1] - x_[k];
  const double t = (s - x_[k]) / hk;
  const double t2 = t * t;
  return (y_[k] * (6.0 * t2 - 6.0 * t) + hk * m_[k] * (3.0 * t2 - 4.0 * t + 1.0) +
          y_[k + 1] * (-6.0 * t2 + 6.0 * t) + hk * m_[k + 1] * (3.0 * t2 - 2.0 * t)) /
         hk;
}

}  // namespace poroscale
