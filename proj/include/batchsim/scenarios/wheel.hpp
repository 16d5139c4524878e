#pragma once

// N agents spin a line pinned at its centre (it can rotate but not translate)
// up to a target angular velocity. Team reward: -|line angular velocity - target|.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Wheel : public Scenario<T> {
 public:
  explicit Wheel(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        line_length_(static_cast<T>(cfg.get_real("line_length", 2.0))),
        line_mass_(static_cast<T>(cfg.get_real("line_mass", 5.0))),
        target_(static_cast<T>(cfg.get_real("target_angular_velocity", 0.3))) {
    require(n_agents_ >= 1, "wheel: n_agents must be >= 1");
    require(line_length_ > T(0) && line_mass_ > T(0), "wheel: line_length and line_mass must be positive");
  }

  std::string_view name() const override { return "wheel"; }

  static constexpr T kAgentRadius = T(0.05);

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius));
    Entity<T> line("line", Line<T>{line_length_}, line_mass_);
    line.movable = false;
    line.rotatable = true;
    line.color = colors::kBlack;
    world.add_landmark(std::move(line));
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    Entity<T>& line = world.landmarks()[0];
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      line.set_pos(e, {});
      line.set_vel(e, {});
      line.state.rot[e] = world.rng().uniform(e, T(0), T(std::numbers::pi));
      line.state.ang_vel[e] = 0;
    });
    // Agents spawn clear of the line.
    const std::size_t B = world.batch_size();
    for_selected(env, B, [&](std::size_t e) {
      for (auto& a : world.agents()) {
        Vec2<T> p{};
        for (int attempt = 0; attempt < 64; ++attempt) {
          p = {world.rng().uniform(e, T(-1), T(1)), world.rng().uniform(e, T(-1), T(1))};
          const auto cp = contact_points(a.shape, Pose<T>{p, 0}, line.shape, line.pose(e));
          if (norm(cp.p_j - cp.p_i) > T(2) * kAgentRadius) break;
        }
        a.set_pos(e, p);
        a.set_vel(e, {});
        a.state.rot[e] = 0;
        a.state.ang_vel[e] = 0;
      }
    });
  }

  BatchScalar<T> reward(World<T>& world, std::size_t) override {
    const std::size_t B = world.batch_size();
    BatchScalar<T> r(B);
    const Entity<T>& line = world.landmarks()[0];
    for (std::size_t e = 0; e < B; ++e) r[e] = -std::abs(line.state.ang_vel[e] - target_);
    return r;
  }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 8; }

  /// [pos, vel, cos(rot), sin(rot), line angular velocity, line angular velocity - target]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    const Entity<T>& line = world.landmarks()[0];
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    T* c = w.next();
    T* s = w.next();
    T* av = w.next();
    T* err = w.next();
    for (std::size_t e = 0; e < B; ++e) {
      c[e] = std::cos(line.state.rot[e]);
      s[e] = std::sin(line.state.rot[e]);
      av[e] = line.state.ang_vel[e];
      err[e] = line.state.ang_vel[e] - target_;
    }
    check_written(w, obs.dim());
    return obs;
  }

  /// Push on the line near its tip on this agent's side, perpendicular to it,
  /// in the direction that spins it toward the target speed.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const T length = static_cast<T>(cfg.get_real("line_length", 2.0));
    return {[length](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> pos = read2(obs, 0);
      const Vec2<T> vel = read2(obs, 2);
      const Vec2<T> dir = {obs[4], obs[5]};
      const T err = obs[7];
      const Vec2<T> normal = {-dir.y, dir.x};
      // Counter-clockwise torque from pushing along +normal at +dir, or -normal at -dir.
      const T along_now = dot(pos, dir);
      const T side = along_now >= T(0) ? T(1) : T(-1);
      const T spin = err < T(0) ? T(1) : T(-1);  // +1 speeds up counter-clockwise
      // Push direction on the line at this end.
      const Vec2<T> push = normal * (spin * side);
      const T arm = side * T(0.7) * length / T(2);
      const Vec2<T> contact = dir * arm;
      // Approach from the side opposite the push.
      const Vec2<T> approach = contact - push * (kAgentRadius * T(1.5));
      const Vec2<T> to_approach = approach - pos;
      const T perp = dot(pos - contact, push);
      if (perp > T(0)) {
        // On the wrong face: go around the tip.
        const Vec2<T> tip = dir * (side * (length / T(2) + T(0.15)));
        return write_action(action, seek(tip - pos, vel));
      }
      if (norm(to_approach) > T(0.1)) return write_action(action, seek(to_approach, vel));
      const T gain = std::clamp(std::abs(err) * T(5), T(0.1), T(1));
      write_action(action, clamp_unit_box(push * gain + to_approach * T(2)));
    }};
  }

 private:
  std::size_t n_agents_;
  T line_length_;
  T line_mass_;
  T target_;
};

}  // namespace batchsim::scenarios
