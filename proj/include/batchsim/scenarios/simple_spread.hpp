#pragma once

// N agents must cover N landmarks. Shared reward: minus the sum over landmarks
// of the closest agent's distance; each agent additionally loses 1 per other
// agent it overlaps.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class SimpleSpread : public Scenario<T> {
 public:
  explicit SimpleSpread(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 3))),
        agent_radius_(static_cast<T>(cfg.get_real("agent_radius", 0.15))),
        collision_penalty_(static_cast<T>(cfg.get_real("collision_penalty", 1.0))) {
    require(n_agents_ >= 1, "simple_spread: n_agents must be >= 1");
    require(agent_radius_ > T(0), "simple_spread: agent_radius must be positive");
  }

  std::string_view name() const override { return "simple_spread"; }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), agent_radius_));
    for (std::size_t i = 0; i < n_agents_; ++i) {
      world.add_landmark(fixed_landmark<T>("landmark_" + std::to_string(i), Sphere<T>{T(0.05)}, false, colors::kBlack));
    }
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    std::vector<Entity<T>*> ents;
    for (auto& a : world.agents()) ents.push_back(&a);
    for (auto& l : world.landmarks()) ents.push_back(&l);
    spawn_separated<T>(ents, {-1, -1}, {1, 1}, T(0), world.rng(), env);
    cover_fresh_ = false;
  }

  // The cover term is shared by every agent, so it is computed once per step.
  void post_step(World<T>& world) override {
    cover_ = cover(world);
    cover_fresh_ = true;
  }

  BatchScalar<T> reward(World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const BatchScalar<T> shared = cover_fresh_ ? cover_ : cover(world);
    BatchScalar<T> r(B);
    const auto& agents = world.agents();
    const T* mx = agents[agent].state.pos.x.data();
    const T* my = agents[agent].state.pos.y.data();
    const T touch2 = T(4) * agent_radius_ * agent_radius_;
    for (std::size_t e = 0; e < B; ++e) r[e] = -shared[e];
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (j == agent) continue;
      const T* ox = agents[j].state.pos.x.data();
      const T* oy = agents[j].state.pos.y.data();
      for (std::size_t e = 0; e < B; ++e) {
        const T dx = ox[e] - mx[e], dy = oy[e] - my[e];
        if (dx * dx + dy * dy < touch2) r[e] -= collision_penalty_;
      }
    }
    return r;
  }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 4 + 2 * n_agents_ + 2 * (n_agents_ - 1); }

  /// [vel, pos, landmark - pos for each landmark, other - pos for each other agent]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    w.put(me.state.vel);
    w.put(me.state.pos);
    for (const auto& l : world.landmarks()) put_rel(w, me, l);
    for (std::size_t j = 0; j < world.agents().size(); ++j) {
      if (j != agent) put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[j]));
    }
    check_written(w, obs.dim());
    return obs;
  }

  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const std::size_t n = static_cast<std::size_t>(cfg.get_int("n_agents", 3));
    return {[n](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> vel = read2(obs, 0);
      // Head for the landmark where this agent has the largest lead over the
      // closest teammate.
      std::size_t target = 0;
      T best_lead = -std::numeric_limits<T>::infinity();
      for (std::size_t l = 0; l < n; ++l) {
        const Vec2<T> land = read2(obs, 4 + 2 * l);
        const T mine = norm(land);
        T other_best = std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j + 1 < n; ++j) {
          const Vec2<T> other = read2(obs, 4 + 2 * n + 2 * j);
          other_best = std::min(other_best, norm(land - other));
        }
        const T lead = other_best - mine;
        if (lead > best_lead) {
          best_lead = lead;
          target = l;
        }
      }
      write_action(action, seek(read2(obs, 4 + 2 * target), vel));
    }};
  }

 private:
  /// Sum over landmarks of the closest agent's distance.
  BatchScalar<T> cover(const World<T>& world) const {
    const std::size_t B = world.batch_size();
    BatchScalar<T> out(B);
    std::vector<T> best(B);
    for (const auto& l : world.landmarks()) {
      std::fill(best.begin(), best.end(), std::numeric_limits<T>::infinity());
      const T* lx = l.state.pos.x.data();
      const T* ly = l.state.pos.y.data();
      for (const auto& a : world.agents()) {
        const T* ax = a.state.pos.x.data();
        const T* ay = a.state.pos.y.data();
        for (std::size_t e = 0; e < B; ++e) best[e] = std::min(best[e], norm(Vec2<T>{ax[e] - lx[e], ay[e] - ly[e]}));
      }
      for (std::size_t e = 0; e < B; ++e) out[e] += best[e];
    }
    return out;
  }

  std::size_t n_agents_;
  T agent_radius_;
  T collision_penalty_;
  BatchScalar<T> cover_;
  bool cover_fresh_ = false;
};

}  // namespace batchsim::scenarios
