#pragma once

// N agents cover M targets. A target counts as covered once at least K agents
// are within cover_distance of it at the same time; it then re-spawns at a new
// random location. Team reward per step:
//   covered targets this step
//   + (previous - current) sum over targets of the distance to the closest agent
//   - collision_penalty per agent-agent contact

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Discovery : public Scenario<T> {
 public:
  explicit Discovery(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 5))),
        n_targets_(static_cast<std::size_t>(cfg.get_int("n_targets", 7))),
        k_cover_(static_cast<std::size_t>(cfg.get_int("k_cover", 2))),
        cover_distance_(static_cast<T>(cfg.get_real("cover_distance", 0.25))),
        use_lidar_(cfg.get_bool("use_lidar", false)),
        collision_penalty_(static_cast<T>(cfg.get_real("collision_penalty", 0.1))) {
    require(n_agents_ >= 1 && n_targets_ >= 1, "discovery: counts must be >= 1");
    require(k_cover_ >= 1 && k_cover_ <= n_agents_, "discovery: k_cover must lie in [1, n_agents]");
    require(cover_distance_ > T(0), "discovery: cover_distance must be positive");
  }

  std::string_view name() const override { return "discovery"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kTargetRadius = T(0.05);

  static Lidar<T> lidar() { return Lidar<T>{.n_rays = 12, .max_range = T(0.35)}; }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) {
      Agent<T> a = sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius);
      if (use_lidar_) a.sensors.push_back(lidar());
      world.add_agent(std::move(a));
    }
    for (std::size_t k = 0; k < n_targets_; ++k) {
      world.add_landmark(fixed_landmark<T>("target_" + std::to_string(k), Sphere<T>{kTargetRadius}, false, colors::kGreen));
    }
    shaper_.init(opts.batch);
    step_reward_.resize(opts.batch);
    covered_now_.resize(opts.batch);
    covered_total_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    std::vector<Entity<T>*> ents;
    for (auto& a : world.agents()) ents.push_back(&a);
    for (auto& l : world.landmarks()) ents.push_back(&l);
    spawn_separated<T>(ents, {-1, -1}, {1, 1}, T(0.2), world.rng(), env);
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      shaper_.set(e, coverage_distance(world, e));
      covered_total_[e] = 0;
    });
  }

  /// Number of agents within cover_distance of target k.
  std::size_t agents_near(const World<T>& world, std::size_t k, std::size_t e) const {
    std::size_t n = 0;
    for (const auto& a : world.agents()) {
      if (distance<T>(a, world.landmarks()[k], e) <= cover_distance_) ++n;
    }
    return n;
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    for (std::size_t e = 0; e < B; ++e) {
      T r = shaper_.advance(e, coverage_distance(world, e));
      T covered = 0;
      for (std::size_t k = 0; k < n_targets_; ++k) {
        if (agents_near(world, k, e) < k_cover_) continue;
        covered += T(1);
        respawn(world, k, e);
      }
      if (covered > T(0)) shaper_.set(e, coverage_distance(world, e));
      const auto& agents = world.agents();
      std::size_t hits = 0;
      for (std::size_t a = 0; a < agents.size(); ++a) {
        for (std::size_t b = a + 1; b < agents.size(); ++b) {
          if (distance<T>(agents[a], agents[b], e) < T(2) * kAgentRadius) ++hits;
        }
      }
      covered_now_[e] = covered;
      covered_total_[e] += covered;
      step_reward_[e] = covered + r - collision_penalty_ * static_cast<T>(hits);
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override {
    return 4 + 2 * n_targets_ + 2 * (n_agents_ - 1) + (use_lidar_ ? lidar().n_rays : 0);
  }

  /// [pos, vel, target - pos per target, other - pos per other agent, lidar (optional)]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    for (const auto& l : world.landmarks()) put_rel(w, me, l);
    for (std::size_t j = 0; j < world.agents().size(); ++j) {
      if (j != agent) put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[j]));
    }
    if (use_lidar_) put_lidar(w, lidar_scan(me, me.sensors[0], world));
    check_written(w, obs.dim());
    return obs;
  }

  InfoMap<T> info(const World<T>&, std::size_t) override {
    return {{"targets_covered", covered_now_}, {"targets_covered_total", covered_total_}};
  }

  /// Each agent heads for the target that minimises its own distance plus
  /// the distance of the nearest teammate, so pairs converge on one target.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n_agents = static_cast<std::size_t>(cfg.get_int("n_agents", 5));
    const auto n_targets = static_cast<std::size_t>(cfg.get_int("n_targets", 7));
    const auto k_cover = static_cast<std::size_t>(cfg.get_int("k_cover", 2));
    return {[=](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> vel = read2(obs, 2);
      T best = std::numeric_limits<T>::infinity();
      Vec2<T> goal{};
      std::vector<T> others;
      for (std::size_t k = 0; k < n_targets; ++k) {
        const Vec2<T> rel = read2(obs, 4 + 2 * k);
        others.clear();
        for (std::size_t j = 0; j + 1 < n_agents; ++j) {
          others.push_back(norm(rel - read2(obs, 4 + 2 * n_targets + 2 * j)));
        }
        std::sort(others.begin(), others.end());
        T cost = norm(rel);
        for (std::size_t j = 0; j + 1 < k_cover && j < others.size(); ++j) cost += others[j];
        if (cost < best) {
          best = cost;
          goal = rel;
        }
      }
      Vec2<T> a = seek(goal, vel);
      // Keep a little spacing from teammates.
      for (std::size_t j = 0; j + 1 < n_agents; ++j) {
        const Vec2<T> rel = read2(obs, 4 + 2 * n_targets + 2 * j);
        const T d = norm(rel);
        if (d > T(0) && d < T(3) * kAgentRadius) a -= rel * (T(0.5) / d);
      }
      write_action(action, clamp_unit_box(a));
    }};
  }

 private:
  void respawn(World<T>& world, std::size_t k, std::size_t e) {
    Entity<T>& t = world.landmarks()[k];
    t.set_pos(e, {world.rng().uniform(e, T(-1), T(1)), world.rng().uniform(e, T(-1), T(1))});
  }

  T coverage_distance(const World<T>& world, std::size_t e) const {
    T sum = 0;
    for (const auto& l : world.landmarks()) {
      T best = std::numeric_limits<T>::infinity();
      for (const auto& a : world.agents()) best = std::min(best, distance<T>(a, l, e));
      sum += best;
    }
    return sum;
  }

  std::size_t n_agents_;
  std::size_t n_targets_;
  std::size_t k_cover_;
  T cover_distance_;
  bool use_lidar_;
  T collision_penalty_;
  Shaper<T> shaper_;
  BatchScalar<T> step_reward_;
  BatchScalar<T> covered_now_;
  BatchScalar<T> covered_total_;
};

}  // namespace batchsim::scenarios
