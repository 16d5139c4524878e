#pragma once

// Blue team (N agents, attacking the right goal) against red team (M agents,
// attacking the left goal). Red is driven by a scripted AI unless self_play is
// set, in which case red agents take actions like blue ones.
// Blue reward per step:
//   (previous - current) ball distance to the right goal
//   + 10 when blue scores, - 10 when red scores
// Red agents receive the negation (zero-sum).
// The episode ends on the first goal.

#include "batchsim/scenarios/common.hpp"

namespace batchsim::scenarios {

template <std::floating_point T>
class Football : public Scenario<T> {
 public:
  explicit Football(const ScenarioConfig& cfg)
      : n_blue_(static_cast<std::size_t>(cfg.get_int("n_blue", 3))),
        n_red_(static_cast<std::size_t>(cfg.get_int("n_red", 3))),
        self_play_(cfg.get_bool("self_play", false)),
        ai_strength_(static_cast<T>(cfg.get_real("ai_strength", 0.4))) {
    require(n_blue_ >= 1 && n_red_ >= 1, "football: team sizes must be >= 1");
    require(ai_strength_ > T(0) && ai_strength_ <= T(1), "football: ai_strength must lie in (0, 1]");
  }

  std::string_view name() const override { return "football"; }
  std::size_t default_max_steps() const override { return 500; }

  static constexpr T kAgentRadius = T(0.05);
  static constexpr T kBallRadius = T(0.03);
  static constexpr T kHalfLength = T(1);
  static constexpr T kHalfWidth = T(0.6);
  static constexpr T kGoalHalf = T(0.2);
  static constexpr T kGoalDepth = T(0.1);
  static constexpr T kGoalReward = T(10);

  World<T> make_world(const WorldOptions& opts) override {
    World<T> world(opts.batch, PhysParams<T>{}, opts.seed, opts.stream_offset);
    for (std::size_t i = 0; i < n_blue_; ++i) world.add_agent(sphere_agent<T>("blue_" + std::to_string(i), kAgentRadius));
    for (std::size_t i = 0; i < n_red_; ++i) {
      Agent<T> a = sphere_agent<T>("red_" + std::to_string(i), kAgentRadius);
      a.color = colors::kRed;
      if (!self_play_) {
        a.action_script = [this, i](World<T>& w, Agent<T>& self) { red_ai(w, self, i); };
      }
      world.add_agent(std::move(a));
    }
    Entity<T> ball("ball", Sphere<T>{kBallRadius}, T(0.25));
    ball.color = colors::kBlack;
    world.add_landmark(std::move(ball));
    const T L = kHalfLength, W = kHalfWidth, G = kGoalHalf, D = kGoalDepth;
    const T side = W - G;
    add_line(world, "wall_top", {0, W}, T(2) * L, 0);
    add_line(world, "wall_bottom", {0, -W}, T(2) * L, 0);
    const T vertical = T(std::numbers::pi / 2);
    for (int s : {-1, 1}) {
      const std::string tag = s < 0 ? "left" : "right";
      add_line(world, "wall_" + tag + "_upper", {s * L, G + side / T(2)}, side, vertical);
      add_line(world, "wall_" + tag + "_lower", {s * L, -G - side / T(2)}, side, vertical);
      add_line(world, "goal_" + tag + "_back", {s * (L + D), 0}, T(2) * G, vertical);
      add_line(world, "goal_" + tag + "_top", {s * (L + D / T(2)), G}, D, 0);
      add_line(world, "goal_" + tag + "_bottom", {s * (L + D / T(2)), -G}, D, 0);
    }
    shaper_.init(opts.batch);
    scored_.assign(opts.batch, 0);
    finished_.assign(opts.batch, 0);
    blue_shaping_.resize(opts.batch);
    return world;
  }

  /// Ball index among landmarks.
  static constexpr std::size_t kBall = 0;

  void reset_world_at(World<T>& world, EnvSelection env) override {
    auto& agents = world.agents();
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      SeededRng& rng = world.rng();
      for (std::size_t i = 0; i < agents.size(); ++i) {
        const bool blue = i < n_blue_;
        const T lo = blue ? T(-0.9) : T(0.3);
        const T hi = blue ? T(-0.3) : T(0.9);
        Vec2<T> p{};
        for (int attempt = 0; attempt < 64; ++attempt) {
          p = {rng.uniform(e, lo, hi), rng.uniform(e, -kHalfWidth + T(0.1), kHalfWidth - T(0.1))};
          bool ok = true;
          for (std::size_t j = 0; j < i && ok; ++j) ok = norm(agents[j].pos(e) - p) > T(3) * kAgentRadius;
          if (ok) break;
        }
        agents[i].set_pos(e, p);
        agents[i].set_vel(e, {});
      }
      Entity<T>& ball = world.landmarks()[kBall];
      ball.set_pos(e, {T(0), rng.uniform(e, T(-0.2), T(0.2))});
      ball.set_vel(e, {});
      shaper_.set(e, norm(ball.pos(e) - Vec2<T>{kHalfLength, 0}));
      scored_[e] = 0;
      finished_[e] = 0;
    });
  }

  void post_step(World<T>& world) override {
    const Entity<T>& ball = world.landmarks()[kBall];
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      blue_shaping_[e] = shaper_.advance(e, norm(ball.pos(e) - Vec2<T>{kHalfLength, 0}));
      scored_[e] = 0;
      if (finished_[e]) continue;
      const Vec2<T> b = ball.pos(e);
      if (std::abs(b.y) < kGoalHalf) {
        if (b.x > kHalfLength + kBallRadius) scored_[e] = 1;
        if (b.x < -kHalfLength - kBallRadius) scored_[e] = -1;
      }
      if (scored_[e] != 0) finished_[e] = 1;
    }
  }

  BatchScalar<T> reward(World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const T sign = agent < n_blue_ ? T(1) : T(-1);
    BatchScalar<T> r(B);
    for (std::size_t e = 0; e < B; ++e) {
      r[e] = sign * (blue_shaping_[e] + kGoalReward * static_cast<T>(scored_[e]));
    }
    return r;
  }

  std::size_t observation_dim(const World<T>&, std::size_t) const override { return 10 + 2 * (n_blue_ + n_red_ - 1); }

  /// [pos, vel, ball - pos, ball vel, attacked goal - pos, teammates - pos, opponents - pos]
  BatchVector<T> observation(const World<T>& world, std::size_t agent) override {
    const std::size_t B = world.batch_size();
    const Agent<T>& me = world.agents()[agent];
    const Entity<T>& ball = world.landmarks()[kBall];
    const bool blue = agent < n_blue_;
    BatchVector<T> obs(B, observation_dim(world, agent));
    ColumnWriter<T> w(obs);
    put_pos_vel(w, me);
    put_rel(w, me, ball);
    w.put(ball.state.vel);
    T* gx = w.next();
    T* gy = w.next();
    const T goal_x = blue ? kHalfLength : -kHalfLength;
    for (std::size_t e = 0; e < B; ++e) {
      gx[e] = goal_x - me.state.pos.x[e];
      gy[e] = -me.state.pos.y[e];
    }
    const std::size_t team_lo = blue ? 0 : n_blue_;
    const std::size_t team_hi = blue ? n_blue_ : n_blue_ + n_red_;
    for (std::size_t j = team_lo; j < team_hi; ++j) {
      if (j != agent) put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[j]));
    }
    for (std::size_t j = 0; j < n_blue_ + n_red_; ++j) {
      if (j < team_lo || j >= team_hi) put_rel(w, me, static_cast<const Entity<T>&>(world.agents()[j]));
    }
    check_written(w, obs.dim());
    return obs;
  }

  BatchMask done(const World<T>& world) override {
    BatchMask d(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) d.set(e, finished_[e] != 0);
    return d;
  }

  InfoMap<T> info(const World<T>& world, std::size_t) override {
    BatchScalar<T> s(world.batch_size());
    for (std::size_t e = 0; e < world.batch_size(); ++e) s[e] = static_cast<T>(scored_[e]);
    return {{"goal", s}};
  }

  /// Closest teammate to the ball dribbles it toward the attacked goal; the
  /// others take up support positions behind the ball.
  static HeuristicPolicy<T> heuristic(const ScenarioConfig& cfg) {
    const auto n_blue = static_cast<std::size_t>(cfg.get_int("n_blue", 3));
    const auto n_red = static_cast<std::size_t>(cfg.get_int("n_red", 3));
    return {[n_blue, n_red](std::span<const T> obs, std::span<T> action) {
      // Blue attacks the goal on the right (self-play gives red agents this policy too).
      const bool blue = obs[0] + obs[8] > T(0);
      write_action(action, team_play(obs, blue ? n_blue : n_red));
    }};
  }

  /// Decentralised team behaviour from one agent's observation.
  static Vec2<T> team_play(std::span<const T> obs, std::size_t team_size) {
    const Vec2<T> pos = read2(obs, 0);
    const Vec2<T> vel = read2(obs, 2);
    const Vec2<T> to_ball = read2(obs, 4);
    const Vec2<T> to_goal = read2(obs, 8);
    const Vec2<T> ball = pos + to_ball;
    const Vec2<T> goal = pos + to_goal;
    const T mine = norm(to_ball);
    std::size_t rank = 0;
    for (std::size_t j = 0; j + 1 < team_size; ++j) {
      const Vec2<T> mate_to_ball = to_ball - read2(obs, 10 + 2 * j);
      if (norm(mate_to_ball) < mine) ++rank;
    }
    if (rank == 0) return push_object(to_ball, goal - ball, vel, kAgentRadius + kBallRadius);
    const T back = goal.x > 0 ? T(-1) : T(1);
    const T lane = rank % 2 == 1 ? T(1) : T(-1);
    Vec2<T> spot = ball + Vec2<T>{back * T(0.3), lane * T(0.25)};
    spot.x = std::clamp(spot.x, -kHalfLength + T(0.1), kHalfLength - T(0.1));
    spot.y = std::clamp(spot.y, -kHalfWidth + T(0.1), kHalfWidth - T(0.1));
    return seek(spot - pos, vel);
  }

 private:
  /// Red script: nearest red chases the ball toward the left goal, the others
  /// hold a defensive line in front of the right goal.
  void red_ai(World<T>& world, Agent<T>& self, std::size_t red_index) const {
    const Entity<T>& ball = world.landmarks()[kBall];
    const std::size_t B = world.batch_size();
    const T u = self.u_range * self.u_multiplier * ai_strength_;
    for (std::size_t e = 0; e < B; ++e) {
      const Vec2<T> b = ball.pos(e);
      std::size_t chaser = 0;
      T best = std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n_red_; ++j) {
        const T d = norm(world.agents()[n_blue_ + j].pos(e) - b);
        if (d < best) {
          best = d;
          chaser = j;
        }
      }
      Vec2<T> a;
      if (chaser == red_index) {
        a = push_object(b - self.pos(e), Vec2<T>{-kHalfLength, 0} - b, self.vel(e), kAgentRadius + kBallRadius);
      } else {
        const T lane = red_index % 2 == 0 ? T(1) : T(-1);
        const Vec2<T> post = {T(0.75), std::clamp(b.y, -kGoalHalf, kGoalHalf) + lane * T(0.1)};
        a = seek(post - self.pos(e), self.vel(e));
      }
      self.action.force.x[e] = a.x * u;
      self.action.force.y[e] = a.y * u;
    }
  }

  static void add_line(World<T>& world, const std::string& name, Vec2<T> at, T length, T rot) {
    Entity<T>& l = world.add_landmark(fixed_landmark<T>(name, Line<T>{length}, true, colors::kBlack));
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      l.set_pos(e, at);
      l.state.rot[e] = rot;
    }
  }

  std::size_t n_blue_;
  std::size_t n_red_;
  bool self_play_;
  T ai_strength_;
  Shaper<T> shaper_;
  BatchScalar<T> blue_shaping_;
  std::vector<int> scored_;
  std::vector<std::uint8_t> finished_;
};

}  // namespace batchsim::scenarios
