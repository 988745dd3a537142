#pragma once

#include <cmath>
#include <stdexcept>

namespace twinbeam {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  bool operator==(const Vec2&) const = default;
};

struct Vec2i {
  int x = 0;
  int y = 0;
  bool operator==(const Vec2i&) const = default;
};

/// Affine map p' = M p + t with M = [[m00 m01],[m10 m11]].
struct Affine2 {
  double m00 = 1.0, m01 = 0.0;
  double m10 = 0.0, m11 = 1.0;
  double tx = 0.0, ty = 0.0;

  Vec2 apply(const Vec2& p) const {
    return {m00 * p.x + m01 * p.y + tx, m10 * p.x + m11 * p.y + ty};
  }

  double det() const { return m00 * m11 - m01 * m10; }

  Affine2 inverse() const {
    const double d = det();
    if (std::abs(d) < 1e-300) {
      throw std::domain_error("Affine2::inverse: singular linear part");
    }
    Affine2 inv;
    inv.m00 = m11 / d;
    inv.m01 = -m01 / d;
    inv.m10 = -m10 / d;
    inv.m11 = m00 / d;
    inv.tx = -(inv.m00 * tx + inv.m01 * ty);
    inv.ty = -(inv.m10 * tx + inv.m11 * ty);
    return inv;
  }

  /// this ∘ other: apply `other` first, then this map.
  Affine2 compose(const Affine2& other) const {
    Affine2 r;
    r.m00 = m00 * other.m00 + m01 * other.m10;
    r.m01 = m00 * other.m01 + m01 * other.m11;
    r.m10 = m10 * other.m00 + m11 * other.m10;
    r.m11 = m10 * other.m01 + m11 * other.m11;
    const Vec2 t = apply({other.tx, other.ty});
    r.tx = t.x;
    r.ty = t.y;
    return r;
  }

  bool operator==(const Affine2&) const = default;
};

}  // namespace twinbeam
