#pragma once

#include <cmath>

namespace poroscale {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2 operator/(double a) const { return {x / a, y / a}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double a, const Vec2& v) { return {a * v.x, a * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double norm_sq(const Vec2& a) { return a.x * a.x + a.y * a.y; }

// 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 scale(double s) { return {s, 0.0, 0.0, s}; }

  double det() const { return a11 * a22 - a12 * a21; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  Mat2 sym() const { return {a11, 0.5 * (a12 + a21), 0.5 * (a12 + a21), a22}; }

  Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
  Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
  Mat2 operator*(double s) const { return {s * a11, s * a12, s * a21, s * a22}; }
};

inline double max_abs(const Mat2& m) {
  return std::max(std::max(std::abs(m.a11), std::abs(m.a12)), std::max(std::abs(m.a21), std::abs(m.a22)));
}

// Eigenvalues of the symmetric part; returns {min, max}.
inline void sym_eigenvalues(const Mat2& m, double& lo, double& hi) {
  const double b = 0.5 * (m.a12 + m.a21);
  const double mean = 0.5 * (m.a11 + m.a22);
  const double rad = std::sqrt(0.25 * (m.a11 - m.a22) * (m.a11 - m.a22) + b * b);
  lo = mean - rad;
  hi = mean + rad;
}

}  // namespace poroscale
