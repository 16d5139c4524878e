#pragma once

// Batched LIDAR: rays cast from agents against every collidable entity.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>

#include "batchsim/world.hpp"

namespace batchsim {

namespace ray {

template <std::floating_point T>
inline constexpr T kNoHit = std::numeric_limits<T>::infinity();

/// Distance along unit direction d from o to the circle boundary; inf if missed.
/// Origins inside the circle report the exit point.
template <std::floating_point T>
T circle(Vec2<T> o, Vec2<T> d, Vec2<T> center, T radius) noexcept {
  const Vec2<T> m = o - center;
  const T b = dot(m, d);
  const T c = dot(m, m) - radius * radius;
  if (c > T(0) && b > T(0)) return kNoHit<T>;
  const T disc = b * b - c;
  if (disc < T(0)) return kNoHit<T>;
  const T sq = std::sqrt(disc);
  T t = -b - sq;
  if (t <= T(0)) t = -b + sq;
  return t > T(0) ? t : kNoHit<T>;
}

template <std::floating_point T>
T segment(Vec2<T> o, Vec2<T> d, Vec2<T> a, Vec2<T> b) noexcept {
  const Vec2<T> e = b - a;
  const T denom = cross(d, e);
  if (denom == T(0)) return kNoHit<T>;
  const Vec2<T> ao = a - o;
  const T t = cross(ao, e) / denom;
  const T u = cross(ao, d) / denom;
  if (t <= T(0) || u < T(0) || u > T(1)) return kNoHit<T>;
  return t;
}

/// Slab method in the box frame. Origins inside the box report the exit point.
template <std::floating_point T>
T rectangle(Vec2<T> o, Vec2<T> d, Vec2<T> center, T rot, T length, T width) noexcept {
  const T c = std::cos(rot);
  const T s = std::sin(rot);
  const Vec2<T> rel = o - center;
  const Vec2<T> lo = {c * rel.x + s * rel.y, -s * rel.x + c * rel.y};
  const Vec2<T> ld = {c * d.x + s * d.y, -s * d.x + c * d.y};
  const T half[2] = {length / T(2), width / T(2)};
  const T org[2] = {lo.x, lo.y};
  const T dir[2] = {ld.x, ld.y};
  T tmin = -std::numeric_limits<T>::infinity();
  T tmax = std::numeric_limits<T>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (dir[k] == T(0)) {
      if (org[k] < -half[k] || org[k] > half[k]) return kNoHit<T>;
      continue;
    }
    T t1 = (-half[k] - org[k]) / dir[k];
    T t2 = (half[k] - org[k]) / dir[k];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmin > tmax) return kNoHit<T>;
  if (tmin > T(0)) return tmin;
  if (tmax > T(0)) return tmax;
  return kNoHit<T>;
}

/// Ray against one shape at the given pose.
template <std::floating_point T>
T shape(Vec2<T> o, Vec2<T> d, const Shape<T>& sh, const Pose<T>& pose) noexcept {
  return std::visit(
      [&](const auto& s) -> T {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Sphere<T>>) {
          return circle(o, d, pose.pos, s.radius);
        } else if constexpr (std::is_same_v<S, Box<T>>) {
          return rectangle(o, d, pose.pos, pose.rot, s.length, s.width);
        } else {
          const Segment<T> seg = geom::line_segment(s, pose);
          return segment(o, d, seg.a, seg.b);
        }
      },
      sh);
}

}  // namespace ray

using EntityPredicate = std::function<bool(std::string_view name)>;

/// Per environment, the distance along the ray to the nearest collidable
/// entity boundary, or max_range if nothing is hit within range.
template <std::floating_point T>
BatchScalar<T> cast_ray(const BatchVec2<T>& origin, const BatchScalar<T>& angle, const World<T>& world, T max_range,
                        std::string_view exclude, const EntityPredicate& detect = {}) {
  const std::size_t batch = origin.size();
  require(angle.size() == batch, "cast_ray: length mismatch");
  BatchScalar<T> out(batch, max_range);
  std::vector<T> dx(batch), dy(batch);
  for (std::size_t e = 0; e < batch; ++e) {
    dx[e] = std::cos(angle[e]);
    dy[e] = std::sin(angle[e]);
  }
  for (std::size_t i = 0; i < world.n_entities(); ++i) {
    const Entity<T>& ent = world.entity(i);
    if (!ent.collidable || ent.name == exclude) continue;
    if (detect && !detect(ent.name)) continue;
    const T reach = max_range + bounding_radius(ent.shape);
    for (std::size_t e = 0; e < batch; ++e) {
      const Vec2<T> o = {origin.x[e], origin.y[e]};
      const Vec2<T> rel = ent.pos(e) - o;
      if (dot(rel, rel) > reach * reach) continue;
      const T t = ray::shape(o, Vec2<T>{dx[e], dy[e]}, ent.shape, ent.pose(e));
      if (t < out[e]) out[e] = t;
    }
  }
  return out;
}

/// Scans one agent's LIDAR; result is batch x n_rays ranges.
template <std::floating_point T>
BatchVector<T> lidar_scan(const Agent<T>& agent, const Lidar<T>& lidar, const World<T>& world,
                          const EntityPredicate& detect = {}) {
  const std::size_t batch = world.batch_size();
  BatchVector<T> out(batch, lidar.n_rays);
  BatchScalar<T> angle(batch);
  const T step = (lidar.end_angle - lidar.start_angle) / static_cast<T>(lidar.n_rays);
  for (std::size_t m = 0; m < lidar.n_rays; ++m) {
    const T base = lidar.start_angle + static_cast<T>(m) * step;
    for (std::size_t e = 0; e < batch; ++e) angle[e] = base + (lidar.attach_rotation ? agent.state.rot[e] : T(0));
    const BatchScalar<T> ranges = cast_ray(agent.state.pos, angle, world, lidar.max_range, agent.name, detect);
    std::copy_n(ranges.data(), batch, out.column(m));
  }
  return out;
}

}  // namespace batchsim
