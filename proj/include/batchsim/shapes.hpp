#pragma once

// Shapes and the per-environment closest-point geometry between them.

#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <string_view>
#include <variant>

#include "batchsim/batch.hpp"
#include "batchsim/vec2.hpp"

namespace batchsim {

template <std::floating_point T>
struct Sphere {
  T radius;
};

/// Rectangle; `length` along the body x axis, `width` along the body y axis.
template <std::floating_point T>
struct Box {
  T length;
  T width;
  /// Spheres inside a hollow box are held in by its walls rather than pushed out.
  bool hollow = false;
};

/// Segment of the given length centred on the body origin, along the body x axis.
template <std::floating_point T>
struct Line {
  T length;
};

template <std::floating_point T>
using Shape = std::variant<Sphere<T>, Box<T>, Line<T>>;

template <std::floating_point T>
std::string_view shape_kind(const Shape<T>& s) {
  switch (s.index()) {
    case 0:
      return "sphere";
    case 1:
      return "box";
    default:
      return "line";
  }
}

template <std::floating_point T>
void validate_shape(const Shape<T>& s) {
  std::visit(
      [](const auto& sh) {
        using S = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<S, Sphere<T>>) {
          require(sh.radius > T(0), "sphere radius must be positive");
        } else if constexpr (std::is_same_v<S, Box<T>>) {
          require(sh.length > T(0) && sh.width > T(0), "box dimensions must be positive");
        } else {
          require(sh.length > T(0), "line length must be positive");
        }
      },
      s);
}

/// Sphere m r^2 / 2, box m (l^2 + w^2) / 12, line m l^2 / 12.
template <std::floating_point T>
T moment_of_inertia(const Shape<T>& s, T mass) {
  return std::visit(
      [mass](const auto& sh) -> T {
        using S = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<S, Sphere<T>>) {
          return mass * sh.radius * sh.radius / T(2);
        } else if constexpr (std::is_same_v<S, Box<T>>) {
          return mass * (sh.length * sh.length + sh.width * sh.width) / T(12);
        } else {
          return mass * sh.length * sh.length / T(12);
        }
      },
      s);
}

/// Radius of the smallest centred circle containing the shape.
template <std::floating_point T>
T bounding_radius(const Shape<T>& s) {
  return std::visit(
      [](const auto& sh) -> T {
        using S = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<S, Sphere<T>>) {
          return sh.radius;
        } else if constexpr (std::is_same_v<S, Box<T>>) {
          return std::sqrt(sh.length * sh.length + sh.width * sh.width) / T(2);
        } else {
          return sh.length / T(2);
        }
      },
      s);
}

template <std::floating_point T>
struct Pose {
  Vec2<T> pos;
  T rot{};
};

template <std::floating_point T>
struct Segment {
  Vec2<T> a;
  Vec2<T> b;
};

template <std::floating_point T>
struct PointPair {
  Vec2<T> p_i;
  Vec2<T> p_j;
};

/// Closest points between two shapes plus the pair's minimum allowable distance.
template <std::floating_point T>
struct ContactPoints {
  Vec2<T> p_i;
  Vec2<T> p_j;
  T d_min;
};

/// Skin distance used for pairs without a radius (line/box against line/box).
template <std::floating_point T>
inline constexpr T kSurfaceSkin = T(1e-4);

namespace geom {

template <std::floating_point T>
Segment<T> line_segment(const Line<T>& l, const Pose<T>& pose) {
  const Vec2<T> half = {std::cos(pose.rot) * l.length / T(2), std::sin(pose.rot) * l.length / T(2)};
  return {pose.pos - half, pose.pos + half};
}

/// Box corners counter-clockwise starting at (+l/2, +w/2) in the body frame.
template <std::floating_point T>
std::array<Vec2<T>, 4> box_corners(const Box<T>& b, const Pose<T>& pose) {
  const T c = std::cos(pose.rot);
  const T s = std::sin(pose.rot);
  const T hx = b.length / T(2);
  const T hy = b.width / T(2);
  const std::array<Vec2<T>, 4> local = {Vec2<T>{hx, hy}, Vec2<T>{-hx, hy}, Vec2<T>{-hx, -hy}, Vec2<T>{hx, -hy}};
  std::array<Vec2<T>, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = pose.pos + rotate(local[k], c, s);
  return out;
}

template <std::floating_point T>
std::array<Segment<T>, 4> box_edges(const Box<T>& b, const Pose<T>& pose) {
  const auto c = box_corners(b, pose);
  return {Segment<T>{c[0], c[1]}, Segment<T>{c[1], c[2]}, Segment<T>{c[2], c[3]}, Segment<T>{c[3], c[0]}};
}

template <std::floating_point T>
Vec2<T> closest_on_segment(Vec2<T> p, const Segment<T>& seg) {
  const Vec2<T> ab = seg.b - seg.a;
  const T len2 = dot(ab, ab);
  if (len2 <= T(0)) return seg.a;
  T t = dot(p - seg.a, ab) / len2;
  t = std::clamp(t, T(0), T(1));
  return seg.a + ab * t;
}

/// Closest point on the rectangle's boundary. Points inside the box project
/// onto the nearest edge.
template <std::floating_point T>
Vec2<T> closest_on_box_boundary(Vec2<T> p, const Box<T>& b, const Pose<T>& pose) {
  const T c = std::cos(pose.rot);
  const T s = std::sin(pose.rot);
  const Vec2<T> d = p - pose.pos;
  Vec2<T> q = {c * d.x + s * d.y, -s * d.x + c * d.y};
  const T hx = b.length / T(2);
  const T hy = b.width / T(2);
  if (std::abs(q.x) > hx || std::abs(q.y) > hy) {
    q.x = std::clamp(q.x, -hx, hx);
    q.y = std::clamp(q.y, -hy, hy);
  } else if (hx - std::abs(q.x) < hy - std::abs(q.y)) {
    q.x = q.x >= T(0) ? hx : -hx;
  } else {
    q.y = q.y >= T(0) ? hy : -hy;
  }
  return pose.pos + rotate(q, c, s);
}

template <std::floating_point T>
bool inside_box(Vec2<T> p, const Box<T>& b, const Pose<T>& pose) {
  const Vec2<T> q = rotate(p - pose.pos, -pose.rot);
  return std::abs(q.x) < b.length / T(2) && std::abs(q.y) < b.width / T(2);
}

/// Closest points between segments s1 and s2 (clamped parametric solution).
template <std::floating_point T>
PointPair<T> closest_between_segments(const Segment<T>& s1, const Segment<T>& s2) {
  const Vec2<T> d1 = s1.b - s1.a;
  const Vec2<T> d2 = s2.b - s2.a;
  const Vec2<T> r = s1.a - s2.a;
  const T a = dot(d1, d1);
  const T e = dot(d2, d2);
  const T f = dot(d2, r);
  T s = 0;
  T t = 0;
  const T eps = std::numeric_limits<T>::epsilon();

  // Proper crossing: the closest points coincide at the intersection.
  const T denom_x = cross(d1, d2);
  if (std::abs(denom_x) > eps * a * e) {
    const Vec2<T> ac = s2.a - s1.a;
    const T u = cross(ac, d2) / denom_x;
    const T v = cross(ac, d1) / denom_x;
    if (u >= T(0) && u <= T(1) && v >= T(0) && v <= T(1)) {
      const Vec2<T> p = s1.a + d1 * u;
      return {p, p};
    }
  }

  if (a <= eps && e <= eps) return {s1.a, s2.a};
  if (a <= eps) {
    t = std::clamp(f / e, T(0), T(1));
  } else {
    const T c = dot(d1, r);
    if (e <= eps) {
      s = std::clamp(-c / a, T(0), T(1));
    } else {
      const T b = dot(d1, d2);
      const T denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, T(0), T(1)) : T(0);
      t = (b * s + f) / e;
      if (t < T(0)) {
        t = 0;
        s = std::clamp(-c / a, T(0), T(1));
      } else if (t > T(1)) {
        t = 1;
        s = std::clamp((b - c) / a, T(0), T(1));
      }
    }
  }
  return {s1.a + d1 * s, s2.a + d2 * t};
}

template <std::floating_point T, std::size_t N, std::size_t M>
PointPair<T> closest_between_segment_sets(const std::array<Segment<T>, N>& lhs, const std::array<Segment<T>, M>& rhs) {
  PointPair<T> best{};
  T best_d2 = std::numeric_limits<T>::infinity();
  for (const auto& s1 : lhs) {
    for (const auto& s2 : rhs) {
      const PointPair<T> pp = closest_between_segments(s1, s2);
      const Vec2<T> d = pp.p_j - pp.p_i;
      const T d2 = dot(d, d);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = pp;
      }
    }
  }
  return best;
}

}  // namespace geom

template <std::floating_point T>
Vec2<T> closest_on_shape(Vec2<T> p, const Line<T>& l, const Pose<T>& pose) {
  return geom::closest_on_segment(p, geom::line_segment(l, pose));
}

template <std::floating_point T>
Vec2<T> closest_on_shape(Vec2<T> p, const Box<T>& b, const Pose<T>& pose) {
  return geom::closest_on_box_boundary(p, b, pose);
}

template <std::floating_point T>
std::array<Segment<T>, 1> edges_of(const Line<T>& l, const Pose<T>& pose) {
  return {geom::line_segment(l, pose)};
}

template <std::floating_point T>
std::array<Segment<T>, 4> edges_of(const Box<T>& b, const Pose<T>& pose) {
  return geom::box_edges(b, pose);
}

/// Closest points for one concrete shape pair.
///
/// Sphere pairs use the sphere centre as its point and carry the radius in
/// d_min; line/box pairs use surface points and the skin constant.
template <class SI, class SJ, std::floating_point T>
ContactPoints<T> contact_points_of(const SI& si, const Pose<T>& pose_i, const SJ& sj, const Pose<T>& pose_j) {
  if constexpr (std::is_same_v<SI, Sphere<T>> && std::is_same_v<SJ, Sphere<T>>) {
    return {pose_i.pos, pose_j.pos, si.radius + sj.radius};
  } else if constexpr (std::is_same_v<SI, Sphere<T>>) {
    const Vec2<T> on_j = closest_on_shape(pose_i.pos, sj, pose_j);
    if constexpr (std::is_same_v<SJ, Box<T>>) {
      // Centre inside the box: mirror the sphere-side point through the face so
      // the contact pushes the sphere out the near side instead of deeper in.
      if (!sj.hollow && geom::inside_box(pose_i.pos, sj, pose_j)) return {on_j * T(2) - pose_i.pos, on_j, si.radius};
    }
    return {pose_i.pos, on_j, si.radius};
  } else if constexpr (std::is_same_v<SJ, Sphere<T>>) {
    const auto flipped = contact_points_of(sj, pose_j, si, pose_i);
    return {flipped.p_j, flipped.p_i, flipped.d_min};
  } else {
    const auto pp = geom::closest_between_segment_sets(edges_of(si, pose_i), edges_of(sj, pose_j));
    return {pp.p_i, pp.p_j, kSurfaceSkin<T>};
  }
}

template <std::floating_point T>
ContactPoints<T> contact_points(const Shape<T>& shape_i, const Pose<T>& pose_i, const Shape<T>& shape_j,
                                const Pose<T>& pose_j) {
  return std::visit([&](const auto& si, const auto& sj) { return contact_points_of(si, pose_i, sj, pose_j); },
                    shape_i, shape_j);
}

}  // namespace batchsim
