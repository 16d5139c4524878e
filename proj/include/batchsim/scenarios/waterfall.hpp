#pragma once

// Demonstration course: agents start along the top edge and make their way
// down through a fixed field of boxes, lines and spheres to goals at the
// bottom, exercising every shape, rotation and the LIDAR. Team reward per
// step: (previous - current) mean agent-goal distance.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Waterfall : public Scenario<T> {
 public:
  explicit Waterfall(const ScenarioConfig& cfg) : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 5))) {
    require(n_agents_ >= 1, "waterfall: n_agents must be >= 1");
  }

  std::string_view name() const override { return "waterfall"; }

  static constexpr T kAgentRadius = T(0.04);

  static Lidar<T> lidar() { return Lidar<T>{.n_rays = 12, .max_range = T(0.3)}; }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) {
      Agent<T> a = sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius);
      a.sensors.push_back(lidar());
      world.add_agent(std::move(a));
    }
    for (std::size_t i = 0; i < n_agents_; ++i) {
      world.add_landmark(fixed_landmark<T>("goal_" + std::to_string(i), Sphere<T>{kAgentRadius}, false, colors::kLightGreen));
    }
    struct Piece {
      const char* name;
      Shape<T> shape;
      Vec2<T> pos;
      T rot;
    };
    const Piece course[] = {
        {"shelf_left", Box<T>{T(0.6), T(0.08)}, {T(-0.45), T(0.45)}, T(-0.3)},
        {"shelf_right", Box<T>{T(0.6), T(0.08)}, {T(0.45), T(0.45)}, T(0.3)},
        {"rock_0", Sphere<T>{T(0.12)}, {T(-0.3), T(0.0)}, T(0)},
        {"rock_1", Sphere<T>{T(0.12)}, {T(0.3), T(0.0)}, T(0)},
        {"ledge", Line<T>{T(0.7)}, {T(0), T(-0.35)}, T(0.2)},
        {"block", Box<T>{T(0.2), T(0.2)}, {T(-0.6), T(-0.5)}, T(0.785)},
    };
    for (const Piece& p : course) {
      Entity<T>& l = world.add_landmark(fixed_landmark<T>(p.name, p.shape, true, colors::kBlack));
      for (std::size_t e = 0; e < opts.batch; ++e) {
        l.set_pos(e, p.pos);
        l.state.rot[e] = p.rot;
      }
    }
    shaper_.init(opts.batch);
    step_reward_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      for (std::size_t i = 0; i < n_agents_; ++i) {
        const T x = n_agents_ == 1 ? T(0) : T(-0.8) + T(1.6) * T(i) / T(n_agents_ - 1);
        const T jitter = world.rng().uniform(e, T(-0.05), T(0.05));
        world.agents()[i].set_pos(e, {x + jitter, T(0.9)});
        world.agents()[i].set_vel(e, {});
        world.landmarks()[i].set_pos(e, {-x, T(-0.9)});
      }
      shaper_.set(e, mean_distance(world, e));
    });
  }

  void post_step(World<T>& world) override {
    for (std::size_t e = 0; e < world.batch_size(); ++e) step_reward_[e] = shaper_.advance(e, mean_distance(world, e));
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 6 + lidar().n_rays; }

  /// [pos, vel, goal - pos, lidar ranges]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, world.landmarks()[agent]);
    put_lidar(w, lidar_scan(me, me.sensors[0], world));
    check_written(w, obs.dim());
    return obs;
  }

  /// Seek the goal, deflected by LIDAR returns.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig&) {
    return {[](std::span<const T> obs, std::span<T> action) {
      const Lidar<T> l = lidar();
      Vec2<T> a = seek(read2(obs, 4), read2(obs, 2));
      a += lidar_repulsion(obs.subspan(6, l.n_rays), l.max_range) * T(1.5);
      write_action(action, clamp_unit_box(a));
    }};
  }

 private:
  T mean_distance(const World<T>& world, std::size_t e) const {
    T sum = 0;
    for (std::size_t i = 0; i < n_agents_; ++i) sum += distance<T>(world.agents()[i], world.landmarks()[i], e);
    return sum / static_cast<T>(n_agents_);
  }

  std::size_t n_agents_;
  Shaper<T> shaper_;
  BatchScalar<T> step_reward_;
};

}  // namespace batchsim::scenarios
