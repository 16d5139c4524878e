#pragma once

// Two agents start in a corridor too narrow to pass, each in front of the
// other's goal. A side pocket in the middle lets one of them step aside.
// Team reward per step:
//   (previous - current) summed agent-goal distances
//   + 1 for each agent that reaches its goal
// Info "success" is 1 once both agents have reached their goals.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class GiveWay : public Scenario<T> {
 public:
  explicit GiveWay(const ScenarioConfig& cfg) : corridor_half_width_(static_cast<T>(cfg.get_real("corridor_half_width", 0.08))) {
    require(corridor_half_width_ > kAgentRadius && corridor_half_width_ < T(2) * kAgentRadius,
            "give_way: corridor_half_width must allow one agent but not two");
  }

  std::string_view name() const override { return "give_way"; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kGoalX = T(0.8);
  static constexpr T kReach = T(0.05);
  static constexpr T kPocketHalf = T(0.1);
  static constexpr T kPocketTop = T(0.3);
  static constexpr T kWall = T(0.1);

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    world.add_agent(sphere_agent<T>("agent_0", kAgentRadius));
    world.add_agent(sphere_agent<T>("agent_1", kAgentRadius));
    world.agents()[1].color = colors::kGreen;
    world.add_landmark(fixed_landmark<T>("goal_0", Sphere<T>{kReach}, false, colors::kBlue));
    world.add_landmark(fixed_landmark<T>("goal_1", Sphere<T>{kReach}, false, colors::kGreen));
    const T h = corridor_half_width_;
    const T arm = T(1.1) - kPocketHalf;
    add_wall(world, "wall_top_left", {-(kPocketHalf + arm / T(2)), h + kWall / T(2)}, {arm, kWall});
    add_wall(world, "wall_top_right", {kPocketHalf + arm / T(2), h + kWall / T(2)}, {arm, kWall});
    add_wall(world, "wall_bottom", {0, -h - kWall / T(2)}, {T(2.2), kWall});
    const T pocket_h = kPocketTop - h;
    add_wall(world, "pocket_left", {-kPocketHalf - kWall / T(2), h + pocket_h / T(2)}, {kWall, pocket_h});
    add_wall(world, "pocket_right", {kPocketHalf + kWall / T(2), h + pocket_h / T(2)}, {kWall, pocket_h});
    add_wall(world, "pocket_top", {0, kPocketTop + kWall / T(2)}, {T(2) * kPocketHalf + T(2) * kWall, kWall});
    add_wall(world, "end_left", {T(-1.05), 0}, {kWall, T(2) * h + T(2) * kWall});
    add_wall(world, "end_right", {T(1.05), 0}, {kWall, T(2) * h + T(2) * kWall});
    shaper_.init(opts.batch);
    reached_.assign(2 * opts.batch, 0);
    step_reward_.resize(opts.batch);
    success_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    const std::size_t B = world.batch_size();
    for_selected(env, B, [&](std::size_t e) {
      for (std::size_t a = 0; a < 2; ++a) {
        const T sx = a == 0 ? -kGoalX : kGoalX;
        world.agents()[a].set_pos(e, {sx, 0});
        world.agents()[a].set_vel(e, {});
        world.landmarks()[a].set_pos(e, {-sx, 0});
        reached_[a * B + e] = 0;
      }
      shaper_.set(e, total_distance(world, e));
      success_[e] = 0;
    });
  }

  void post_step(World<T>& world) override {
    const std::size_t B = world.batch_size();
    for (std::size_t e = 0; e < B; ++e) {
      T r = shaper_.advance(e, total_distance(world, e));
      for (std::size_t a = 0; a < 2; ++a) {
        if (!reached_[a * B + e] && distance<T>(world.agents()[a], world.landmarks()[a], e) < kReach) {
          reached_[a * B + e] = 1;
          r += T(1);
        }
      }
      success_[e] = (reached_[e] && reached_[B + e]) ? T(1) : T(0);
      step_reward_[e] = r;
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 8; }

  /// [pos, vel, goal - pos, other - pos]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(world.batch_size(), observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, world.landmarks()[agent]);
    put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[1 - agent]));
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, success_[e] > T(0));
    return d;
  }

  InfoMap<T> info(const World<T>&, std::size_t) override { return {{"success", success_}}; }

  /// The agent heading left steps into the pocket until the other has passed;
  /// the agent heading right waits short of the pocket until it is clear.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig&) {
    return {[](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> pos = read2(obs, 0);
      const Vec2<T> vel = read2(obs, 2);
      const Vec2<T> goal = pos + read2(obs, 4);
      const Vec2<T> other = pos + read2(obs, 6);
      const bool yielder = goal.x < T(0);
      const T dir = yielder ? T(-1) : T(1);
      // Has the other agent already got past me?
      const bool passed = (other.x - pos.x) * dir < -T(2) * kAgentRadius;
      const T pocket_y = (kPocketTop + T(0.08)) / T(2) + T(0.02);
      Vec2<T> target = goal;
      if (yielder && !passed) {
        // Into the pocket: line up under it, then climb.
        target = std::abs(pos.x) > T(0.02) && pos.y < T(0.05) ? Vec2<T>{0, 0} : Vec2<T>{0, pocket_y};
      } else if (yielder && pos.y > T(0.05) && std::abs(pos.x) < kPocketHalf) {
        target = {T(0), T(0)};  // drop back into the corridor before moving on
        if (pos.y < T(0.02)) target = goal;
      } else if (!yielder && !passed && other.y < T(0.14)) {
        target = {T(-0.3), T(0)};  // wait until the pocket is occupied
      }
      Vec2<T> a = seek(target - pos, vel);
      // Stay centred in the corridor while travelling along it.
      if (std::abs(pos.x) > kPocketHalf) a.y = std::clamp(T(-4) * pos.y - vel.y, T(-1), T(1));
      write_action(action, a);
    }};
  }

 private:
  static void add_wall(World<T>& world, const std::string& name, Vec2<T> at, Vec2<T> size) {
    Entity<T>& w = world.add_landmark(fixed_landmark<T>(name, Box<T>{size.x, size.y}, true, colors::kBlack));
    for (std::size_t e = 0; e < world.batch_size(); ++e) w.set_pos(e, at);
  }

  T total_distance(const World<T>& world, std::size_t e) const {
    return distance<T>(world.agents()[0], world.landmarks()[0], e) + distance<T>(world.agents()[1], world.landmarks()[1], e);
  }

  T corridor_half_width_;
  Shaper<T> shaper_;
  std::vector<std::uint8_t> reached_;
  BatchScalar<T> step_reward_;
  BatchScalar<T> success_;
};

}  // namespace batchsim::scenarios
