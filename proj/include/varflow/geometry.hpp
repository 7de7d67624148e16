#pragma once

#include <array>
#include <cmath>

namespace varflow {

/// Minimal 2D point/vector type used throughout the mesh and FE layers.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Scalar 2D cross product a.x*b.y - a.y*b.x.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// Rotate v by -90 degrees: maps a unit tangent to the right-handed normal.
inline Vec2 perp(const Vec2& v) { return {v.y, -v.x}; }

/// Column-major 2x2 matrix for affine element maps.
struct Mat2 {
  // entries a(row, col)
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  Vec2 apply(const Vec2& v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
  double det() const { return a00 * a11 - a01 * a10; }
  Mat2 inverse() const {
    const double d = det();
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
  }
  Mat2 transpose() const { return {a00, a10, a01, a11}; }
};

}  // namespace varflow
