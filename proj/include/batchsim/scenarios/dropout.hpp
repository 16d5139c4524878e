#pragma once

// N agents, one goal; the episode succeeds as soon as any agent reaches it.
// Team reward per step:
//   (previous - current) closest-agent distance to the goal
//   + 1 on reaching the goal
//   - energy_coeff * sum over agents of |f_action|^2

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Dropout : public Scenario<T> {
 public:
  explicit Dropout(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        energy_coeff_(static_cast<T>(cfg.get_real("energy_coeff", 0.02))) {
    require(n_agents_ >= 1, "dropout: n_agents must be >= 1");
    require(energy_coeff_ >= T(0), "dropout: energy_coeff must be >= 0");
  }

  std::string_view name() const override { return "dropout"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kGoalRadius = T(0.05);

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius));
    world.add_landmark(fixed_landmark<T>("goal", Sphere<T>{kGoalRadius}, false, colors::kGreen));
    shaper_.init(opts.batch);
    reached_.assign(opts.batch, 0);
    step_reward_.resize(opts.batch);
    energy_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    std::vector<Entity<T>*> ents;
    for (auto& a : world.agents()) ents.push_back(&a);
    ents.push_back(&world.landmarks()[0]);
    spawn_separated<T>(ents, {-1, -1}, {1, 1}, T(0.2), world.rng(), env);
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      shaper_.set(e, closest(world, e));
      reached_[e] = 0;
    });
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    for (std::size_t e = 0; e < B; ++e) {
      const T d = closest(world, e);
      T r = shaper_.advance(e, d);
      if (!reached_[e] && d < kAgentRadius + kGoalRadius) {
        reached_[e] = 1;
        r += T(1);
      }
      T energy = 0;
      for (const auto& a : world.agents()) {
        const T fx = a.action.force.x[e];
        const T fy = a.action.force.y[e];
        energy += fx * fx + fy * fy;
      }
      energy_[e] = energy_coeff_ * energy;
      step_reward_[e] = r - energy_[e];
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 6 + n_agents_; }

  /// [pos, vel, goal - pos, distance of every agent to the goal]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    const Entity<T>& goal = world.landmarks()[0];
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, goal);
    for (const auto& a : world.agents()) {
      T* col = w.next();
      for (std::size_t e = 0; e < B; ++e) col[e] = distance<T>(a, goal, e);
    }
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, reached_[e] != 0);
    return d;
  }

  InfoMap<T> info(const World<T>&, std::size_t) override { return {{"energy_penalty", energy_}}; }

  /// Only the agent closest to the goal moves.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n = static_cast<std::size_t>(cfg.get_int("n_agents", 4));
    return {[n](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> rel = read2(obs, 4);
      const T mine = norm(rel);
      T closest = std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) closest = std::min(closest, obs[6 + j]);
      if (mine <= closest + T(1e-6)) {
        write_action(action, seek(rel, read2(obs, 2)));
      } else {
        write_action(action, Vec2<T>{});
      }
    }};
  }

 private:
  T closest(const World<T>& world, std::size_t e) const {
    T best = std::numeric_limits<T>::infinity();
    for (const auto& a : world.agents()) best = std::min(best, distance<T>(a, world.landmarks()[0], e));
    return best;
  }

  std::size_t n_agents_;
  T energy_coeff_;
  Shaper<T> shaper_;
  std::vector<std::uint8_t> reached_;
  BatchScalar<T> step_reward_;
  BatchScalar<T> energy_;
};

}  // namespace batchsim::scenarios
