#pragma once

// N agents flock around a static target while avoiding M spherical obstacles.
// Team reward: (previous - current) mean agent-target distance, minus
// collision_penalty per agent-obstacle or agent-agent contact.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Flocking : public Scenario<T> {
 public:
  explicit Flocking(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        n_obstacles_(static_cast<std::size_t>(cfg.get_int("n_obstacles", 5))),
        use_lidar_(cfg.get_bool("use_lidar", true)),
        collision_penalty_(static_cast<T>(cfg.get_real("collision_penalty", 0.1))) {
    require(n_agents_ >= 1, "flocking: n_agents must be >= 1");
  }

  std::string_view name() const override { return "flocking"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kObstacleRadius = T(0.1);
  static constexpr T kFlockRadius = T(0.2);

  static Lidar<T> lidar() { return Lidar<T>{.n_rays = 12, .max_range = T(0.35)}; }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) {
      Agent<T> a = sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius);
      if (use_lidar_) a.sensors.push_back(lidar());
      world.add_agent(std::move(a));
    }
    world.add_landmark(fixed_landmark<T>("target", Sphere<T>{T(0.03)}, false, colors::kGreen));
    for (std::size_t k = 0; k < n_obstacles_; ++k) {
      world.add_landmark(fixed_landmark<T>("obstacle_" + std::to_string(k), Sphere<T>{kObstacleRadius}, true, colors::kRed));
    }
    shaper_.init(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    std::vector<Entity<T>*> ents;
    for (auto& l : world.landmarks()) ents.push_back(&l);
    for (auto& a : world.agents()) ents.push_back(&a);
    spawn_separated<T>(ents, {-1, -1}, {1, 1}, T(0.25), world.rng(), env);
    for_selected(env, world.batch_size(), [&](std::size_t e) { shaper_.set(e, mean_distance(world, e)); });
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    step_reward_.resize(B);
    const auto& agents = world.agents();
    for (std::size_t e = 0; e < B; ++e) {
      T r = shaper_.advance(e, mean_distance(world, e));
      std::size_t hits = 0;
      for (std::size_t a = 0; a < agents.size(); ++a) {
        for (std::size_t k = 1; k < world.landmarks().size(); ++k) {
          if (distance<T>(agents[a], world.landmarks()[k], e) < kAgentRadius + kObstacleRadius) ++hits;
        }
        for (std::size_t b = a + 1; b < agents.size(); ++b) {
          if (distance<T>(agents[a], agents[b], e) < T(2) * kAgentRadius) ++hits;
        }
      }
      step_reward_[e] = r - collision_penalty_ * static_cast<T>(hits);
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override {
    return 6 + (use_lidar_ ? lidar().n_rays : 0);
  }

  /// [pos, vel, target - pos, lidar ranges (optional)]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, world.landmarks()[0]);
    if (use_lidar_) put_lidar(w, lidar_scan(me, me.sensors[0], world));
    check_written(w, obs.dim());
    return obs;
  }

  /// Seek the target, pushed off obstacles seen by the LIDAR.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const bool use_lidar = cfg.get_bool("use_lidar", true);
    return {[use_lidar](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> rel = read2(obs, 4);
      const Vec2<T> vel = read2(obs, 2);
      // Hold a ring around the target instead of piling onto it.
      const T d = norm(rel);
      Vec2<T> goal = rel;
      if (d > T(0)) goal = rel * (std::max(d - kFlockRadius * T(0.5), T(0)) / d);
      Vec2<T> a = seek(goal, vel);
      if (use_lidar) {
        const Lidar<T> l = lidar();
        a += lidar_repulsion(obs.subspan(6, l.n_rays), l.max_range) * T(2);
      }
      write_action(action, clamp_unit_box(a));
    }};
  }

 private:
  T mean_distance(const World<T>& world, std::size_t e) const {
    T sum = 0;
    for (const auto& a : world.agents()) sum += distance<T>(a, world.landmarks()[0], e);
    return sum / static_cast<T>(world.agents().size());
  }

  std::size_t n_agents_;
  std::size_t n_obstacles_;
  bool use_lidar_;
  T collision_penalty_;
  Shaper<T> shaper_;
  BatchScalar<T> step_reward_;
};

}  // namespace batchsim::scenarios
