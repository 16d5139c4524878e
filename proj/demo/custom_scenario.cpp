// Defining a scenario outside the library and stepping a batch of it.
//
// One agent per env must reach a goal that respawns when touched.

#include <iostream>

#include "batchsim/batchsim.hpp"

using namespace batchsim;

class ChaseGoal : public Scenario<float> {
 public:
  std::string_view name() const override { return "chase_goal"; }

  World<float> make_world(const WorldOptions& opts) override {
    World<float> world(opts.batch, PhysParams<float>{}, opts.seed, opts.stream_offset);
    world.add_agent(Agent<float>("agent_0", Sphere<float>{0.05f}));
    Entity<float> goal("goal", Sphere<float>{0.05f});
    goal.movable = false;
    goal.collidable = false;
    world.add_landmark(std::move(goal));
    reward_.resize(opts.batch);
    return world;
  }

  void reset_world_at(World<float>& world, EnvSelection env) override {
    for_selected(env, world.batch_size(), [&](std::size_t e) {
      world.agents()[0].set_pos(e, {0, 0});
      world.agents()[0].set_vel(e, {});
      respawn(world, e);
    });
  }

  void post_step(World<float>& world) override {
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      const float d = norm(world.landmarks()[0].pos(e) - world.agents()[0].pos(e));
      reward_[e] = -d;
      if (d < 0.1f) {
        reward_[e] += 10;
        respawn(world, e);
      }
    }
  }

  BatchScalar<float> reward(World<float>&, std::size_t) override { return reward_; }

  std::size_t observation_dim(const World<float>&, std::size_t) const override { return 2; }

  BatchVector<float> observation(const World<float>& world, std::size_t) override {
    BatchVector<float> obs(world.batch_size(), 2);
    for (std::size_t e = 0; e < world.batch_size(); ++e) {
      const Vec2<float> rel = world.landmarks()[0].pos(e) - world.agents()[0].pos(e);
      obs(e, 0) = rel.x;
      obs(e, 1) = rel.y;
    }
    return obs;
  }

 private:
  void respawn(World<float>& world, std::size_t e) {
    world.landmarks()[0].set_pos(e, {world.rng().uniform(e, -1.f, 1.f), world.rng().uniform(e, -1.f, 1.f)});
  }

  BatchScalar<float> reward_;
};

int main() {
  constexpr std::size_t kEnvs = 1024;
  Env<float> env(std::make_unique<ChaseGoal>(), EnvOptions{.batch = kEnvs, .seed = 1, .max_steps = 200});
  std::vector<BatchVector<float>> obs = env.reset();
  double total = 0;
  for (int t = 0; t < 200; ++t) {
    // Steer straight at the goal: the observation is the goal offset.
    BatchVector<float> act(kEnvs, 2);
    for (std::size_t e = 0; e < kEnvs; ++e) {
      act(e, 0) = std::clamp(4 * obs[0](e, 0), -1.f, 1.f);
      act(e, 1) = std::clamp(4 * obs[0](e, 1), -1.f, 1.f);
    }
    std::vector<RawAction<float>> actions{RawAction<float>::continuous(std::move(act))};
    StepResult<float> r = env.step(actions);
    for (std::size_t e = 0; e < kEnvs; ++e) total += r.rewards[0][e];
    obs = std::move(r.obs);
  }
  std::cout << "mean return over " << kEnvs << " envs: " << total / kEnvs << '\n';
}
