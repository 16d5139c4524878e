#pragma once

// N agents start at one common point and must eat N food particles. A food is
// eaten the first step any agent's centre is within (agent radius + food
// radius); every agent receives the number of food eaten that step.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Dispersion : public Scenario<T> {
 public:
  explicit Dispersion(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        n_food_(static_cast<std::size_t>(cfg.get_int("n_food", cfg.get_int("n_agents", 4)))) {
    require(n_agents_ >= 1 && n_food_ >= 1, "dispersion: counts must be >= 1");
  }

  std::string_view name() const override { return "dispersion"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kFoodRadius = T(0.05);

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) {
      // Agents share a spawn point, so they do not collide with each other.
      Agent<T> a = sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius);
      a.collidable = false;
      world.add_agent(std::move(a));
    }
    for (std::size_t k = 0; k < n_food_; ++k) {
      world.add_landmark(fixed_landmark<T>("food_" + std::to_string(k), Sphere<T>{kFoodRadius}, false, colors::kGreen));
    }
    eaten_.assign(n_food_ * opts.batch, 0);
    eaten_now_.assign(opts.batch, T(0));
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    const std::size_t B = world.batch_size();
    for_selected(env, B, [&](std::size_t e) {
      for (auto& a : world.agents()) {
        a.set_pos(e, {});
        a.set_vel(e, {});
      }
      for (std::size_t k = 0; k < n_food_; ++k) eaten_[k * B + e] = 0;
      eaten_now_[e] = 0;
    });
    std::vector<Entity<T>*> food;
    for (auto& l : world.landmarks()) food.push_back(&l);
    const Entity<T>* origin = &world.agents()[0];
    spawn_separated<T>(food, {-1, -1}, {1, 1}, T(0.25), world.rng(), env, std::span<const Entity<T>* const>(&origin, 1));
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    std::fill(eaten_now_.begin(), eaten_now_.end(), T(0));
    for (std::size_t k = 0; k < n_food_; ++k) {
      const Entity<T>& f = world.landmarks()[k];
      for (std::size_t e = 0; e < B; ++e) {
        if (eaten_[k * B + e]) continue;
        for (const auto& a : world.agents()) {
          if (distance<T>(a, f, e) < kAgentRadius + kFoodRadius) {
            eaten_[k * B + e] = 1;
            eaten_now_[e] += T(1);
            break;
          }
        }
      }
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return BatchScalar<T>(eaten_now_); }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 4 + 3 * n_food_; }

  /// [pos, vel, (food - pos, eaten) per food]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    for (std::size_t k = 0; k < n_food_; ++k) {
      put_rel(w, me, world.landmarks()[k]);
      T* flag = w.next();
      for (std::size_t e = 0; e < B; ++e) flag[e] = eaten_[k * B + e] ? T(1) : T(0);
    }
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    const std::size_t B = world.batch_size();
    BatchMask d(B, true);
    for (std::size_t e = 0; e < B; ++e) {
      for (std::size_t k = 0; k < n_food_; ++k) {
        if (!eaten_[k * B + e]) {
          d.set(e, false);
          break;
        }
      }
    }
    return d;
  }

  InfoMap<T> info(const World<T>& world, std::size_t) override {
    const std::size_t B = world.batch_size();
    BatchScalar<T> n(B);
    for (std::size_t e = 0; e < B; ++e) {
      for (std::size_t k = 0; k < n_food_; ++k) n[e] += eaten_[k * B + e] ? T(1) : T(0);
    }
    return {{"food_eaten", n}};
  }

  bool eaten(std::size_t food, std::size_t env, std::size_t batch) const { return eaten_[food * batch + env] != 0; }

  /// Nearest uneaten food.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n_food = static_cast<std::size_t>(cfg.get_int("n_food", cfg.get_int("n_agents", 4)));
    return {[n_food](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> vel = read2(obs, 2);
      T best = std::numeric_limits<T>::infinity();
      Vec2<T> target{};
      for (std::size_t k = 0; k < n_food; ++k) {
        if (obs[4 + 3 * k + 2] > T(0.5)) continue;
        const Vec2<T> rel = read2(obs, 4 + 3 * k);
        if (norm(rel) < best) {
          best = norm(rel);
          target = rel;
        }
      }
      write_action(action, std::isfinite(best) ? seek(target, vel) : seek(Vec2<T>{}, vel));
    }};
  }

 private:
  std::size_t n_agents_;
  std::size_t n_food_;
  std::vector<std::uint8_t> eaten_;  // n_food x B
  std::vector<T> eaten_now_;
};

}  // namespace batchsim::scenarios
