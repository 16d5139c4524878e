#pragma once

// Five agents in a cross formation sit below a wall with M narrow passages and
// must reproduce the same formation on the goals above it. Agent i is assigned
// goal i. Team reward per step:
//   (previous - current) sum of agent-to-assigned-goal distances
//   - collision_penalty per agent-agent contact
//   + 1 once every agent is on its goal (episode ends)

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Passage : public Scenario<T> {
 public:
  explicit Passage(const ScenarioConfig& cfg)
      : n_passages_(static_cast<std::size_t>(cfg.get_int("n_passages", 1))),
        use_lidar_(cfg.get_bool("use_lidar", false)),
        collision_penalty_(static_cast<T>(cfg.get_real("collision_penalty", 0.05))) {
    require(n_passages_ >= 1 && n_passages_ <= 4, "passage: n_passages must lie in [1, 4]");
  }

  std::string_view name() const override { return "passage"; }

  static constexpr std::size_t kAgents = 5;
  static constexpr T kAgentRadius = T(0.03);
  static constexpr T kSpacing = T(0.1);
  static constexpr T kPassageWidth = T(0.2);
  static constexpr T kWallThickness = T(0.1);
  static constexpr T kOnGoal = T(0.03);

  static Lidar<T> lidar() { return Lidar<T>{.n_rays = 12, .max_range = T(0.35)}; }

  /// Cross formation offsets: centre, right, left, up, down.
  static Vec2<T> formation(std::size_t i) {
    constexpr T d = kSpacing;
    const Vec2<T> offsets[kAgents] = {{0, 0}, {d, 0}, {-d, 0}, {0, d}, {0, -d}};
    return offsets[i];
  }

  /// x coordinate of passage k.
  static T passage_x(std::size_t k, std::size_t n) { return T(-1) + T(2) * static_cast<T>(k + 1) / static_cast<T>(n + 1); }

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < kAgents; ++i) {
      Agent<T> a = sphere_agent<T>("agent_" + std::to_string(i), kAgentRadius);
      if (use_lidar_) a.sensors.push_back(lidar());
      world.add_agent(std::move(a));
    }
    for (std::size_t i = 0; i < kAgents; ++i) {
      world.add_landmark(fixed_landmark<T>("goal_" + std::to_string(i), Sphere<T>{kAgentRadius}, false, colors::kLightGreen));
    }
    // Wall pieces between the passages.
    T left = T(-1.1);
    for (std::size_t k = 0; k <= n_passages_; ++k) {
      const T right = k < n_passages_ ? passage_x(k, n_passages_) - kPassageWidth / T(2) : T(1.1);
      Entity<T>& wall = world.add_landmark(
          fixed_landmark<T>("wall_" + std::to_string(k), Box<T>{right - left, kWallThickness}, true, colors::kBlack));
      for (std::size_t e = 0; e < opts.batch; ++e) wall.set_pos(e, {(left + right) / T(2), T(0)});
      if (k < n_passages_) left = passage_x(k, n_passages_) + kPassageWidth / T(2);
    }
    shaper_.init(opts.batch);
    step_reward_.resize(opts.batch);
    finished_.assign(opts.batch, 0);
    return world;
  }

  void reset_world_at(World<T>& world, EnvSelection env) override {
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      SeededRng& rng = world.rng();
      const Vec2<T> start = {rng.uniform(e, T(-0.7), T(0.7)), rng.uniform(e, T(-0.75), T(-0.35))};
      const Vec2<T> goal = {rng.uniform(e, T(-0.7), T(0.7)), rng.uniform(e, T(0.35), T(0.75))};
      for (std::size_t i = 0; i < kAgents; ++i) {
        world.agents()[i].set_pos(e, start + formation(i));
        world.agents()[i].set_vel(e, {});
        world.landmarks()[i].set_pos(e, goal + formation(i));
      }
      shaper_.set(e, total_distance(world, e));
      finished_[e] = 0;
    });
  }

  void post_step(World<T>& world) override {
    const auto& agents = world.agents();
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      T r = shaper_.advance(e, total_distance(world, e));
      std::size_t hits = 0;
      bool all_on_goal = true;
      for (std::size_t a = 0; a < kAgents; ++a) {
        for (std::size_t b = a + 1; b < kAgents; ++b) {
          if (distance<T>(agents[a], agents[b], e) < T(2) * kAgentRadius) ++hits;
        }
        all_on_goal = all_on_goal && distance<T>(agents[a], world.landmarks()[a], e) < kOnGoal;
      }
      r -= collision_penalty_ * static_cast<T>(hits);
      if (all_on_goal && !finished_[e]) {
        finished_[e] = 1;
        r += T(1);
      }
      step_reward_[e] = r;
    }
  }

  BatchScalar<T> reward(World<T>&, std::size_t) override { return step_reward_; }

  std::size_t observation_dim(const World<T>&, std::size_t) const override {
    return 6 + 2 * n_passages_ + 2 * (kAgents - 1) + (use_lidar_ ? lidar().n_rays : 0);
  }

  /// [pos, vel, goal - pos, passage centre - pos per passage, other - pos per
  ///  other agent, lidar (optional)]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, world.landmarks()[agent]);
    for (std::size_t k = 0; k < n_passages_; ++k) {
      T* px = w.next();
      T* py = w.next();
      const T x = passage_x(k, n_passages_);
      for (std::size_t e = 0; e < B; ++e) {
        px[e] = x - me.state.pos.x[e];
        py[e] = -me.state.pos.y[e];
      }
    }
    for (std::size_t j = 0; j < kAgents; ++j) {
      if (j != agent) put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[j]));
    }
    if (use_lidar_) put_lidar(w, lidar_scan(me, me.sensors[0], world));
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, finished_[e] != 0);
    return d;
  }

  /// Line up under the nearest passage, go through it, then seek the goal,
  /// keeping clear of teammates.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n_passages = static_cast<std::size_t>(cfg.get_int("n_passages", 1));
    return {[n_passages](std::span<const T> obs, std::span<T> action) {
      const Vec2<T> pos = read2(obs, 0);
      const Vec2<T> vel = read2(obs, 2);
      const Vec2<T> goal = pos + read2(obs, 4);
      Vec2<T> gap{};
      T best = std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < n_passages; ++k) {
        const Vec2<T> p = pos + read2(obs, 6 + 2 * k);
        const T cost = std::abs(p.x - pos.x) + std::abs(p.x - goal.x);
        if (cost < best) {
          best = cost;
          gap = p;
        }
      }
      const T clear = kWallThickness / T(2) + kAgentRadius + T(0.02);
      Vec2<T> target = goal;
      if (pos.y < clear) {
        const bool lined_up = std::abs(pos.x - gap.x) < kPassageWidth / T(2) - kAgentRadius - T(0.01);
        target = lined_up ? Vec2<T>{gap.x, clear + T(0.05)} : Vec2<T>{gap.x, -clear - T(0.05)};
      }
      Vec2<T> a = seek(target - pos, vel, T(4), T(1));
      // Give way to teammates that are ahead in the queue.
      const std::size_t others = 6 + 2 * n_passages;
      for (std::size_t j = 0; j + 1 < kAgents; ++j) {
        const Vec2<T> rel = read2(obs, others + 2 * j);
        const T d = norm(rel);
        if (d > T(0) && d < T(3) * kAgentRadius) a -= rel * (T(0.6) / d);
      }
      write_action(action, clamp_unit_box(a));
    }};
  }

 private:
  T total_distance(const World<T>& world, std::size_t e) const {
    T sum = 0;
    for (std::size_t a = 0; a < kAgents; ++a) sum += distance<T>(world.agents()[a], world.landmarks()[a], e);
    return sum;
  }

  std::size_t n_passages_;
  bool use_lidar_;
  T collision_penalty_;
  Shaper<T> shaper_;
  BatchScalar<T> step_reward_;
  std::vector<std::uint8_t> finished_;
};

}  // namespace batchsim::scenarios
