#pragma once

// N agents spawn inside a large hollow package and push it onto a goal from
// within. Team reward per step:
//   (previous - current) package-goal distance
//   + 1 when the package reaches the goal (episode ends)

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class ReverseTransport : public Scenario<T> {
 public:
  explicit ReverseTransport(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        package_mass_(static_cast<T>(cfg.get_real("package_mass", 50.0))),
        package_size_(static_cast<T>(cfg.get_real("package_size", 0.6))) {
    require(n_agents_ >= 1, "reverse_transport: n_agents must be >= 1");
    require(package_mass_ > T(0), "reverse_transport: package_mass must be positive");
    require(package_size_ > T(4) * kAgentRadius, "reverse_transport: package_size too small to hold an agent");
  }

  std::string_view name() const override { return "reverse_transport"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kGoalRadius = T(0.1);

  enum Landmark : std::size_t { kGoal = 0, kPackage = 1 };

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius));
    world.add_landmark(fixed_landmark<T>("goal", Sphere<T>{kGoalRadius}, false, colors::kLightGreen));
    Entity<T> pkg("package", Box<T>{package_size_, package_size_, true}, package_mass_);
    pkg.rotatable = false;
    pkg.color = colors::kRed;
    world.add_landmark(std::move(pkg));
    shaper_.init(opts.batch);
    finished_.assign(opts.batch, 0);
    step_reward_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    std::vector<Entity<T>*> goal_and_package = {&world.landmarks()[kGoal], &world.landmarks()[kPackage]};
    spawn_separated<T>(goal_and_package, {T(-0.7), T(-0.7)}, {T(0.7), T(0.7)}, T(0.8), world.rng(), env);
    const T inner = package_size_ / T(2) - kAgentRadius - T(0.01);
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      const Vec2<T> c = world.landmarks()[kPackage].pos(e);
      for (auto& a : world.agents()) {
        a.set_pos(e, c + Vec2<T>{world.rng().uniform(e, -inner, inner), world.rng().uniform(e, -inner, inner)});
        a.set_vel(e, {});
      }
      shaper_.set(e, package_distance(world, e));
      finished_[e] = 0;
    });
  }

  void post_step(World<T>& world) override {
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      const T d = package_distance(world, e);
      T r = shaper_.advance(e, d);
      if (!finished_[e] && d < kGoalRadius) {
        finished_[e] = 1;
        r += T(1);
      }
      step_reward_[e] = r;
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 10; }

  /// [pos, vel, package - pos, goal - package, package vel]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    const auto& lm = world.landmarks();
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, lm[kPackage]);
    put_rel(w, lm[kPackage], lm[kGoal]);
    w.put(lm[kPackage].state.vel);
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, finished_[e] != 0);
    return d;
  }

  /// Press against the inner wall facing the goal, easing off near the goal so
  /// the package does not overshoot.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig&) {
    return {[](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> pkg_to_goal = read2(obs, 6);
      const Vec2<T> pkg_vel = read2(obs, 8);
      const T d = norm(pkg_to_goal);
      if (d < T(1e-6)) {
        write_action(action, Vec2<T>{});
        return;
      }
      const Vec2<T> u = pkg_to_goal * (T(1) / d);
      // Desired package speed falls off near the goal.
      const T want = std::min(d, T(0.3)) * T(0.5);
      const T gain = std::clamp((want - dot(pkg_vel, u)) * T(40), T(-1), T(1));
      write_action(action, clamp_unit_box(u * gain));
    }};
  }

 private:
  T package_distance(const World<T>& world, std::size_t e) const {
    return distance<T>(world.landmarks()[kPackage], world.landmarks()[kGoal], e);
  }

  std::size_t n_agents_;
  T package_mass_;
  T package_size_;
  Shaper<T> shaper_;
  std::vector<std::uint8_t> finished_;
  BatchScalar<T> step_reward_;
};

}  // namespace batchsim::scenarios
