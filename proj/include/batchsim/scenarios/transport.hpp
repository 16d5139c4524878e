#pragma once

// N agents push M heavy packages onto one goal. Team reward per step:
//   (previous - current) sum over packages of the package-goal distance
//   + 1 for each package that reaches the goal this step
// Done once every package sits on the goal.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Transport : public Scenario<T> {
 public:
  explicit Transport(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 4))),
        n_packages_(static_cast<std::size_t>(cfg.get_int("n_packages", 1))),
        package_mass_(static_cast<T>(cfg.get_real("package_mass", 50.0))),
        package_size_(static_cast<T>(cfg.get_real("package_size", 0.15))),
        package_shape_(cfg.get_string("package_shape", "box")) {
    require(n_agents_ >= 1 && n_packages_ >= 1, "transport: counts must be >= 1");
    require(package_mass_ > T(0), "transport: package_mass must be positive");
    require(package_size_ > T(0), "transport: package_size must be positive");
    require(package_shape_ == "box" || package_shape_ == "sphere", "transport: package_shape must be box or sphere");
  }

  std::string_view name() const override { return "transport"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kGoalRadius = T(0.15);

  /// Steady-state push speed of one agent glued to the package (velocity
  /// recurrence fixed point u / (m damping) dt), used to size "too heavy".
  static T single_agent_speed(T u_range, T mass, const PhysParams<T>& p) { return u_range * p.dt / (mass * p.damping); }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius));
    world.add_landmark(fixed_landmark<T>("goal", Sphere<T>{kGoalRadius}, false, colors::kLightGreen));
    for (std::size_t k = 0; k < n_packages_; ++k) {
      const Shape<T> shape = package_shape_ == "box" ? Shape<T>(Box<T>{package_size_, package_size_})
                                                     : Shape<T>(Sphere<T>{package_size_ / T(2)});
      Entity<T> p("package_" + std::to_string(k), shape, package_mass_);
      p.rotatable = false;
      p.color = colors::kRed;
      world.add_landmark(std::move(p));
    }
    shaper_.init(opts.batch);
    on_goal_.assign(n_packages_ * opts.batch, 0);
    step_reward_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    const std::size_t B = world.batch_size();
    std::vector<Entity<T>*> goal_and_packages;
    for (auto& l : world.landmarks()) goal_and_packages.push_back(&l);
    spawn_separated<T>(goal_and_packages, {T(-0.8), T(-0.8)}, {T(0.8), T(0.8)}, T(0.6), world.rng(), env);
    std::vector<Entity<T>*> agents;
    for (auto& a : world.agents()) agents.push_back(&a);
    std::vector<const Entity<T>*> avoid;
    for (const auto& l : world.landmarks()) avoid.push_back(&l);
    spawn_separated<T>(agents, {-1, -1}, {1, 1}, T(0.2), world.rng(), env, avoid);
    for_selected(env, B, [&](std::size_t e) {
      for (std::size_t k = 0; k < n_packages_; ++k) on_goal_[k * B + e] = 0;
      shaper_.set(e, total_distance(world, e));
    });
  }

  bool package_on_goal(const World<T>& world, std::size_t k, std::size_t e) const {
    return distance<T>(world.landmarks()[1 + k], world.landmarks()[0], e) < kGoalRadius;
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    for (std::size_t e = 0; e < B; ++e) {
      T r = shaper_.advance(e, total_distance(world, e));
      for (std::size_t k = 0; k < n_packages_; ++k) {
        const bool now = package_on_goal(world, k, e);
        if (now && !on_goal_[k * B + e]) r += T(1);
        on_goal_[k * B + e] = now ? 1 : 0;
      }
      step_reward_[e] = r;
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 4 + 7 * n_packages_; }

  /// [pos, vel, per package: (package - pos, goal - package, package vel, on_goal)]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    const Entity<T>& goal = world.landmarks()[0];
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    for (std::size_t k = 0; k < n_packages_; ++k) {
      const Entity<T>& p = world.landmarks()[1 + k];
      put_rel(w, me, p);
      put_rel(w, p, goal);
      w.put(p.state.vel);
      T* flag = w.next();
      for (std::size_t e = 0; e < B; ++e) flag[e] = on_goal_[k * B + e] ? T(1) : T(0);
    }
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    const std::size_t B = world.batch_size();
    BatchMask d(B, true);
    for (std::size_t e = 0; e < B; ++e) {
      for (std::size_t k = 0; k < n_packages_; ++k) {
        if (!on_goal_[k * B + e]) {
          d.set(e, false);
          break;
        }
      }
    }
    return d;
  }

  /// Work on the first package not yet on the goal: get behind it (going
  /// around when on the wrong side), then push toward the goal.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n_packages = static_cast<std::size_t>(cfg.get_int("n_packages", 1));
    const T size = static_cast<T>(cfg.get_real("package_size", 0.15));
    return {[=](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> vel = read2(obs, 2);
      std::size_t k = 0;
      while (k + 1 < n_packages && obs[4 + 7 * k + 6] > T(0.5)) ++k;
      const Vec2<T> to_pkg = read2(obs, 4 + 7 * k);
      const Vec2<T> pkg_to_goal = read2(obs, 4 + 7 * k + 2);
      write_action(action, push_object(to_pkg, pkg_to_goal, vel, size / T(2) + kAgentRadius));
    }};
  }

 private:
  T total_distance(const World<T>& world, std::size_t e) const {
    T sum = 0;
    for (std::size_t k = 0; k < n_packages_; ++k) sum += distance<T>(world.landmarks()[1 + k], world.landmarks()[0], e);
    return sum;
  }

  std::size_t n_agents_;
  std::size_t n_packages_;
  T package_mass_;
  T package_size_;
  std::string package_shape_;
  Shaper<T> shaper_;
  std::vector<std::uint8_t> on_goal_;
  BatchScalar<T> step_reward_;
};

}  // namespace batchsim::scenarios
