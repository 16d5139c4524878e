#pragma once

#include <cmath>
#include <concepts>

namespace batchsim {

/// Plain 2D vector for per-environment scalar math.
template <std::floating_point T>
struct Vec2 {
  T x{};
  T y{};

  constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const noexcept { return {-x, -y}; }
  constexpr Vec2 operator*(T s) const noexcept { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) noexcept {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) noexcept {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

template <std::floating_point T>
constexpr Vec2<T> operator*(T s, Vec2<T> v) noexcept {
  return v * s;
}

template <std::floating_point T>
constexpr T dot(Vec2<T> a, Vec2<T> b) noexcept {
  return a.x * b.x + a.y * b.y;
}

/// Signed 2D cross product a.x * b.y - a.y * b.x.
template <std::floating_point T>
constexpr T cross(Vec2<T> a, Vec2<T> b) noexcept {
  return a.x * b.y - a.y * b.x;
}

template <std::floating_point T>
inline T norm(Vec2<T> v) noexcept {
  return std::sqrt(v.x * v.x + v.y * v.y);
}

template <std::floating_point T>
inline Vec2<T> rotate(Vec2<T> v, T angle) noexcept {
  const T c = std::cos(angle);
  const T s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

template <std::floating_point T>
inline Vec2<T> rotate(Vec2<T> v, T c, T s) noexcept {
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Unit vector along v, or zero when v is (near) zero.
template <std::floating_point T>
inline Vec2<T> normalized(Vec2<T> v) noexcept {
  const T n = norm(v);
  if (n <= T(1e-12)) return {};
  return v * (T(1) / n);
}

}  // namespace batchsim
