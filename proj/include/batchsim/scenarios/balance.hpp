#pragma once

// Vertical gravity. N agents start on the floor under a line that carries a
// spherical package; they must lift the package to a goal above without
// dropping it. Team reward per step:
//   (previous - current) package-goal distance
//   + 1 when the package reaches the goal
//   - 1 when it touches the floor (episode ends either way)

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Balance : public Scenario<T> {
 public:
  explicit Balance(const ScenarioConfig& cfg)
      : n_agents_(static_cast<std::size_t>(cfg.get_int("n_agents", 3))),
        package_mass_(static_cast<T>(cfg.get_real("package_mass", 5.0))),
        line_mass_(static_cast<T>(cfg.get_real("line_mass", 5.0))),
        gravity_(static_cast<T>(cfg.get_real("gravity", 0.05))) {
    require(n_agents_ >= 1, "balance: n_agents must be >= 1");
    require(package_mass_ > T(0) && line_mass_ > T(0), "balance: masses must be positive");
    require(gravity_ > T(0), "balance: gravity must be positive");
  }

  std::string_view name() const override { return "balance"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kPackageRadius = T(0.05);
  static constexpr T kLineLength = T(0.8);
  static constexpr T kFloorTop = T(-1);
  static constexpr T kGoalRadius = T(0.1);

  enum Landmark : std::size_t { kFloor = 0, kLine = 1, kPackage = 2, kGoal = 3 };

  World<T> make_world(const WorldOptions& opts) override {
    PhysParams<T> p;
    p.gravity = {T(0), -gravity_};
    World<T> world(opts.batch, p, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_agents_; ++i) world.add_agent(sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius));
    Entity<T> floor = fixed_landmark<T>("floor", Box<T>{T(6), T(0.1)}, true, colors::kBlack);
    world.add_landmark(std::move(floor));
    Entity<T> line("line", Line<T>{kLineLength}, line_mass_);
    line.color = colors::kBlack;
    world.add_landmark(std::move(line));
    Entity<T> pkg("package", Sphere<T>{kPackageRadius}, package_mass_);
    pkg.color = colors::kRed;
    world.add_landmark(std::move(pkg));
    world.add_landmark(fixed_landmark<T>("goal", Sphere<T>{kGoalRadius}, false, colors::kLightGreen));
    shaper_.init(opts.batch);
    finished_.assign(opts.batch, 0);
    step_reward_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    auto& lm = world.landmarks();
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      SeededRng& rng = world.rng();
      const T cx = rng.uniform(e, T(-0.5), T(0.5));
      const T line_y = kFloorTop + T(2) * kAgentRadius + T(0.001);
      lm[kFloor].set_pos(e, {T(0), kFloorTop - T(0.05)});
      lm[kLine].set_pos(e, {cx, line_y});
      lm[kLine].state.rot[e] = 0;
      lm[kLine].state.ang_vel[e] = 0;
      lm[kLine].set_vel(e, {});
      const T px = cx + rng.uniform(e, T(-0.25), T(0.25)) * kLineLength;
      lm[kPackage].set_pos(e, {px, line_y + kPackageRadius + T(0.001)});
      lm[kPackage].set_vel(e, {});
      lm[kGoal].set_pos(e, {rng.uniform(e, T(-0.5), T(0.5)), rng.uniform(e, T(0), T(0.5))});
      auto& agents = world.agents();
      for (std::size_t i = 0; i < agents.size(); ++i) {
        const T frac = agents.size() == 1 ? T(0) : T(i) / T(agents.size() - 1) - T(0.5);
        agents[i].set_pos(e, {cx + frac * kLineLength * T(0.8), kFloorTop + kAgentRadius});
        agents[i].set_vel(e, {});
      }
      shaper_.set(e, distance<T>(lm[kPackage], lm[kGoal], e));
      finished_[e] = 0;
    });
  }

  bool package_fallen(const World<T>& world, std::size_t e) const {
    return world.landmarks()[kPackage].pos(e).y < kFloorTop + kPackageRadius + T(0.02) && !on_line(world, e);
  }

  void post_step(World<T>& world) override {
    const auto& lm = world.landmarks();
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      T r = shaper_.advance(e, distance<T>(lm[kPackage], lm[kGoal], e));
      if (!finished_[e]) {
        if (distance<T>(lm[kPackage], lm[kGoal], e) < kGoalRadius) {
          r += T(1);
          finished_[e] = 1;
        } else if (package_fallen(world, e)) {
          r -= T(1);
          finished_[e] = 1;
        }
      }
      step_reward_[e] = r;
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 17; }

  /// [pos, vel, line - pos, cos(line rot), sin(line rot), line angular velocity,
  ///  line vel, package - pos, package vel, goal - package]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    const auto& lm = world.landmarks();
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, lm[kLine]);
    T* c = w.next();
    T* s = w.next();
    for (std::size_t e = 0; e < B; ++e) {
      c[e] = std::cos(lm[kLine].state.rot[e]);
      s[e] = std::sin(lm[kLine].state.rot[e]);
    }
    w.put(lm[kLine].state.ang_vel);
    w.put(lm[kLine].state.vel);
    put_rel(w, me, lm[kPackage]);
    w.put(lm[kPackage].state.vel);
    put_rel(w, lm[kPackage], lm[kGoal]);
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, finished_[e] != 0);
    return d;
  }

  /// Lift at a steady climb rate while tilting the line so the package rolls
  /// back toward its centre.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const T g = static_cast<T>(cfg.get_real("gravity", 0.05));
    const T load = (static_cast<T>(cfg.get_real("package_mass", 5.0)) + static_cast<T>(cfg.get_real("line_mass", 5.0))) * g;
    const auto n = static_cast<T>(cfg.get_int("n_agents", 3));
    return {[=](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> vel = read2(obs, 2);
      const Vec2<T> to_line = read2(obs, 4);
      const Vec2<T> dir = {obs[6], obs[7]};
      const T omega = obs[8];
      const Vec2<T> to_pkg = read2(obs, 11);
      const Vec2<T> pkg_vel = read2(obs, 13);
      const Vec2<T> pkg_to_goal = read2(obs, 15);
      const T rot = std::atan2(dir.y, dir.x);
      const T lever = dot(to_line * T(-1), dir);  // my position along the line
      const T pkg_offset = dot(to_pkg - to_line, dir);
      const T pkg_speed = dot(pkg_vel, dir);
      // Raise the end the package drifts toward.
      const T target_rot = std::clamp(T(1.5) * pkg_offset + T(4) * pkg_speed, T(-0.3), T(0.3));
      const T tilt = T(3) * (target_rot - rot) - T(2) * omega;
      const T climb = std::clamp(pkg_to_goal.y, T(-0.1), T(0.1));
      const T fy = load / n + g + T(3) * (climb - vel.y) + tilt * lever * T(2);
      // Stay spread under the line.
      const T half = kLineLength / T(2) * T(0.8);
      T fx = -vel.x;
      if (lever > half) fx += T(2) * (half - lever) * dir.x;
      if (lever < -half) fx += T(2) * (-half - lever) * dir.x;
      write_action(action, clamp_unit_box(Vec2<T>{fx, fy}));
    }};
  }

 private:
  bool on_line(const World<T>& world, std::size_t e) const {
    const auto& lm = world.landmarks();
    const auto cp = contact_points(lm[kPackage].shape, lm[kPackage].pose(e), lm[kLine].shape, lm[kLine].pose(e));
    return norm(cp.p_j - cp.p_i) < kPackageRadius + T(0.01);
  }

  std::size_t n_agents_;
  T package_mass_;
  T line_mass_;
  T gravity_;
  Shaper<T> shaper_;
  std::vector<std::uint8_t> finished_;
  BatchScalar<T> step_reward_;
};

}  // namespace batchsim::scenarios
