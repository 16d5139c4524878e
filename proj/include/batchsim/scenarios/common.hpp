#pragma once

// Shared building blocks for the bundled scenarios.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "batchsim/env.hpp"
#include "batchsim/scenario.hpp"
#include "batchsim/sensors.hpp"

namespace batchsim {

/// Decentralized controller: one agent's observation in, raw continuous
/// action (movement, then communication) out.
template <std::floating_point T>
struct HeuristicPolicy {
  std::function<void(std::span<const T> obs, std::span<T> action)> act;
};

namespace scenarios {

template <std::floating_point T>
Agent<T> sphere_agent(std::string name, T radius, T mass = T(1)) {
  Agent<T> a(std::move(name), Sphere<T>{radius}, mass);
  return a;
}

/// Static, optionally collidable marker or obstacle.
template <std::floating_point T>
Entity<T> fixed_landmark(std::string name, Shape<T> shape, bool collidable, Color color) {
  Entity<T> l(std::move(name), shape);
  l.movable = false;
  l.rotatable = false;
  l.collidable = collidable;
  l.color = color;
  return l;
}

template <std::floating_point T>
T distance(const Entity<T>& a, const Entity<T>& b, std::size_t e) {
  return norm(b.pos(e) - a.pos(e));
}

template <std::floating_point T>
bool touching(const Entity<T>& a, const Entity<T>& b, std::size_t e) {
  const auto cp = contact_points(a.shape, a.pose(e), b.shape, b.pose(e));
  return norm(cp.p_j - cp.p_i) < cp.d_min;
}

/// Places each entity uniformly in [lo, hi] per selected environment, keeping
/// centres at least `min_dist` from every entity placed before it and from
/// `avoid`. Gives up after a bounded number of draws and keeps the last one.
template <std::floating_point T>
void spawn_separated(std::span<Entity<T>* const> ents, Vec2<T> lo, Vec2<T> hi, T min_dist, SeededRng& rng,
                     EnvSelection sel, std::span<const Entity<T>* const> avoid = {}) {
  constexpr int kAttempts = 64;
  const std::size_t batch = rng.batch();
  for_selected(sel, batch, [&](std::size_t e) {
    for (std::size_t k = 0; k < ents.size(); ++k) {
      Vec2<T> p{};
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        p = {rng.uniform(e, lo.x, hi.x), rng.uniform(e, lo.y, hi.y)};
        bool ok = true;
        for (std::size_t m = 0; m < k && ok; ++m) ok = norm(ents[m]->pos(e) - p) >= min_dist;
        for (const Entity<T>* a : avoid) {
          if (!ok) break;
          ok = norm(a->pos(e) - p) >= min_dist;
        }
        if (ok) break;
      }
      ents[k]->set_pos(e, p);
      ents[k]->set_vel(e, {});
      ents[k]->state.rot[e] = 0;
      ents[k]->state.ang_vel[e] = 0;
    }
  });
}

/// Per-environment "previous value" bookkeeping for delta-based shaping.
template <std::floating_point T>
class Shaper {
 public:
  void init(std::size_t batch) { prev_.resize(batch); }
  void set(std::size_t e, T value) { prev_[e] = value; }
  /// Returns prev - current and stores current.
  T advance(std::size_t e, T current) {
    const T d = prev_[e] - current;
    prev_[e] = current;
    return d;
  }
  T prev(std::size_t e) const { return prev_[e]; }

 private:
  BatchScalar<T> prev_;
};

/// PD steering toward a relative target, clamped to the unit box.
template <std::floating_point T>
Vec2<T> seek(Vec2<T> rel, Vec2<T> vel, T kp = T(4), T kd = T(1)) {
  Vec2<T> a = rel * kp - vel * kd;
  return {std::clamp(a.x, T(-1), T(1)), std::clamp(a.y, T(-1), T(1))};
}

template <std::floating_point T>
Vec2<T> clamp_unit_box(Vec2<T> a) {
  return {std::clamp(a.x, T(-1), T(1)), std::clamp(a.y, T(-1), T(1))};
}

template <std::floating_point T>
Vec2<T> read2(std::span<const T> obs, std::size_t at) {
  return {obs[at], obs[at + 1]};
}

template <std::floating_point T>
void write_action(std::span<T> action, Vec2<T> a) {
  action[0] = a.x;
  action[1] = a.y;
  for (std::size_t k = 2; k < action.size(); ++k) action[k] = T(0);
}

/// Pushing behaviour for a round-ish object: get behind it relative to the
/// goal (swinging out sideways when on the wrong side), then push through.
/// `standoff` is the centre distance at contact.
template <std::floating_point T>
Vec2<T> push_object(Vec2<T> to_obj, Vec2<T> obj_to_goal, Vec2<T> vel, T standoff) {
  const T dg = norm(obj_to_goal);
  if (dg < T(1e-6)) return seek(Vec2<T>{}, vel);
  const Vec2<T> u = obj_to_goal * (T(1) / dg);
  const Vec2<T> me_from_obj = to_obj * T(-1);
  const T along = dot(me_from_obj, u);
  if (along > -standoff * T(0.5)) {
    Vec2<T> side = {-u.y, u.x};
    if (dot(me_from_obj, side) < T(0)) side = side * T(-1);
    const Vec2<T> waypoint = side * (standoff + T(0.1)) + u * (-standoff);
    return seek(waypoint - me_from_obj, vel);
  }
  const Vec2<T> behind = u * (-(standoff + T(0.02)));
  const Vec2<T> offset = behind - me_from_obj;
  if (norm(offset) > T(0.08)) return seek(offset, vel);
  return clamp_unit_box(u + offset * T(4));
}

/// Repulsion away from LIDAR returns closer than the sensor range.
template <std::floating_point T>
Vec2<T> lidar_repulsion(std::span<const T> ranges, T max_range, T rot = T(0), T start = T(0),
                        T end = T(2 * std::numbers::pi)) {
  Vec2<T> push{};
  const std::size_t n = ranges.size();
  for (std::size_t m = 0; m < n; ++m) {
    const T closeness = T(1) - ranges[m] / max_range;
    if (closeness <= T(0)) continue;
    const T angle = start + static_cast<T>(m) * (end - start) / static_cast<T>(n) + rot;
    push -= Vec2<T>{std::cos(angle), std::sin(angle)} * closeness;
  }
  return push;
}

/// Writes position and velocity of an entity into the next four columns.
template <std::floating_point T>
void put_pos_vel(ColumnWriter<T>& w, const Entity<T>& ent) {
  w.put(ent.state.pos);
  w.put(ent.state.vel);
}

/// Writes (to - from) positions into the next two columns.
template <std::floating_point T>
void put_rel(ColumnWriter<T>& w, const Entity<T>& from, const Entity<T>& to) {
  T* cx = w.next();
  T* cy = w.next();
  const std::size_t batch = from.state.batch();
  for (std::size_t e = 0; e < batch; ++e) {
    cx[e] = to.state.pos.x[e] - from.state.pos.x[e];
    cy[e] = to.state.pos.y[e] - from.state.pos.y[e];
  }
}

template <std::floating_point T>
void put_lidar(ColumnWriter<T>& w, const BatchVector<T>& scan) {
  for (std::size_t k = 0; k < scan.dim(); ++k) std::copy_n(scan.column(k), scan.batch(), w.next());
}

template <std::floating_point T>
void check_written(const ColumnWriter<T>& w, std::size_t dim) {
  require(w.written() == dim, "observation width does not match observation_dim");
}

}  // namespace scenarios
}  // namespace batchsim
