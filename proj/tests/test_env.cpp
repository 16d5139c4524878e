#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace batchsim;
using testutil::env_slice;

namespace {

/// One free agent in an empty zero-gravity world, spawned at random.
class Lonely : public Scenario<float> {
 public:
  std::string_view name() const override { return "lonely"; }
  World<float> make_world(const WorldOptions& o) override {
    World<float> w(o.batch, PhysParams<float>{}, o.seed, o.stream_offset);
    Agent<float> a("agent_0", Sphere<float>{0.05f});
    a.silent = silent;
    a.comm_dim = 3;
    a.obs_noise_std = obs_noise;
    w.add_agent(std::move(a));
    return w;
  }
  void reset_world_at(World<float>& w, EnvSelection env) override {
    for_selected(env, w.batch_size(), [&](std::size_t e) {
      w.agents()[0].set_pos(e, {w.rng().uniform(e, -1.f, 1.f), w.rng().uniform(e, -1.f, 1.f)});
      w.agents()[0].set_vel(e, {});
    });
  }
  BatchScalar<float> reward(World<float>& w, std::size_t) override { return BatchScalar<float>(w.batch_size()); }
  std::size_t observation_dim(const World<float>&, std::size_t) const override { return 4; }
  BatchVector<float> observation(const World<float>& w, std::size_t) override {
    BatchVector<float> obs(w.batch_size(), 4);
    ColumnWriter<float> cw(obs);
    cw.put(w.agents()[0].state.pos);
    cw.put(w.agents()[0].state.vel);
    return obs;
  }

  bool silent = true;
  float obs_noise = 0;
};

Agent<float> agent_with(float u_range, float mult) {
  Agent<float> a("a", Sphere<float>{0.05f});
  a.u_range = u_range;
  a.u_multiplier = mult;
  return a;
}

}  // namespace

TEST(DecodeAction, DiscreteMapping) {
  SeededRng rng(0, 5);
  const Agent<float> a = agent_with(1, 0.5f);
  ActionSpec<float> spec;
  spec.mode = ActionMode::discrete;
  const auto out = decode_action(RawAction<float>::discrete({0, 1, 2, 3, 4}), spec, a, rng);
  const float ex[5] = {0, 0.5f, -0.5f, 0, 0};
  const float ey[5] = {0, 0, 0, 0.5f, -0.5f};
  for (std::size_t e = 0; e < 5; ++e) {
    EXPECT_EQ(out.force.x[e], ex[e]);
    EXPECT_EQ(out.force.y[e], ey[e]);
  }
}

TEST(DecodeAction, ContinuousClampsBeforeMultiplier) {
  SeededRng rng(0, 1);
  ActionSpec<float> spec;
  BatchVector<float> v(1, 2);
  v(0, 0) = 9;
  v(0, 1) = -9;
  auto out = decode_action(RawAction<float>::continuous(v), spec, agent_with(1, 1), rng);
  EXPECT_EQ(out.force.x[0], 1.f);
  EXPECT_EQ(out.force.y[0], -1.f);
  spec.u_range = 2;
  out = decode_action(RawAction<float>::continuous(v), spec, agent_with(2, 0.25f), rng);
  EXPECT_EQ(out.force.x[0], 0.5f);
  EXPECT_EQ(out.force.y[0], -0.5f);
}

TEST(DecodeAction, RejectsBadInput) {
  SeededRng rng(0, 1);
  ActionSpec<float> spec;
  BatchVector<float> v(1, 2);
  v(0, 0) = std::nanf("");
  EXPECT_THROW(decode_action(RawAction<float>::continuous(v), spec, agent_with(1, 1), rng), ContractViolation);
  EXPECT_THROW(decode_action(RawAction<float>::continuous(BatchVector<float>(1, 3)), spec, agent_with(1, 1), rng),
               ContractViolation);
  spec.mode = ActionMode::discrete;
  EXPECT_THROW(decode_action(RawAction<float>::discrete({5}), spec, agent_with(1, 1), rng), ContractViolation);
  EXPECT_THROW(decode_action(RawAction<float>::discrete({-1}), spec, agent_with(1, 1), rng), ContractViolation);
}

TEST(DecodeAction, CommunicationPassThroughAndOneHot) {
  SeededRng rng(0, 2);
  Agent<float> a = agent_with(1, 1);
  a.silent = false;
  a.comm_dim = 3;
  ActionSpec<float> spec;
  spec.comm_dim = 3;
  BatchVector<float> v(2, 5);
  v(1, 3) = 0.7f;
  auto out = decode_action(RawAction<float>::continuous(v), spec, a, rng);
  EXPECT_EQ(out.comm(1, 1), 0.7f);
  spec.mode = ActionMode::discrete;
  out = decode_action(RawAction<float>::discrete({0, 0}, {2, 0}), spec, a, rng);
  EXPECT_EQ(out.comm.row(0), (std::vector<float>{0, 0, 1}));
  EXPECT_EQ(out.comm.row(1), (std::vector<float>{1, 0, 0}));
}

TEST(DecodeAction, SilentAgentHasNoCommunication) {
  Env<float> env(std::make_unique<Lonely>(), EnvOptions{.batch = 1});
  EXPECT_EQ(env.action_spec(0).continuous_dim(), 2u);
}

TEST(DecodeAction, NoiseHasRequestedSpread) {
  constexpr std::size_t B = 20000;
  SeededRng rng(3, B);
  Agent<float> a = agent_with(1, 1);
  a.action_noise_std = 0.1f;
  ActionSpec<float> spec;
  const auto out = decode_action(RawAction<float>::continuous(BatchVector<float>(B, 2)), spec, a, rng);
  double sum = 0, sq = 0;
  for (std::size_t e = 0; e < B; ++e) {
    sum += out.force.x[e];
    sq += double(out.force.x[e]) * out.force.x[e];
  }
  EXPECT_NEAR(sum / B, 0.0, 0.005);
  EXPECT_NEAR(std::sqrt(sq / B), 0.1, 0.005);
}

TEST(Env, ZeroBatchRejected) {
  EXPECT_THROW(Env<float>(std::make_unique<Lonely>(), EnvOptions{.batch = 0}), ContractViolation);
}

TEST(Env, GiveWayHasTwoAgents) {
  Env<float> env = make_env<float>("give_way", {}, EnvOptions{.batch = 1});
  EXPECT_EQ(env.n_agents(), 2u);
}

TEST(Env, LargeBatchSizesEveryState) {
  Env<float> env = make_env<float>("transport", {}, EnvOptions{.batch = 4096});
  for (std::size_t i = 0; i < env.world().n_entities(); ++i) {
    const auto& s = env.world().entity(i).state;
    EXPECT_EQ(s.pos.size(), 4096u);
    EXPECT_EQ(s.vel.size(), 4096u);
    EXPECT_EQ(s.rot.size(), 4096u);
    EXPECT_EQ(s.ang_vel.size(), 4096u);
  }
}

TEST(Env, SameSeedSameInitialObservations) {
  Env<float> a = make_env<float>("flocking", {}, EnvOptions{.batch = 8, .seed = 42});
  Env<float> b = make_env<float>("flocking", {}, EnvOptions{.batch = 8, .seed = 42});
  EXPECT_EQ(a.observe(std::nullopt), b.observe(std::nullopt));
  Env<float> c = make_env<float>("flocking", {}, EnvOptions{.batch = 8, .seed = 43});
  EXPECT_NE(a.observe(std::nullopt), c.observe(std::nullopt));
}

TEST(Env, ResetOneLeavesOthersBitwiseUnchanged) {
  Env<float> env = make_env<float>("discovery", {}, EnvOptions{.batch = 8, .seed = 1});
  batchsim::RandomPolicy<float> random(5, 8);
  for (int t = 0; t < 10; ++t) env.step(random(env));
  std::vector<std::vector<float>> before;
  for (std::size_t e = 0; e < 8; ++e) before.push_back(env_slice(env.world(), e));
  const auto steps = env.step_count();
  env.reset(3);
  for (std::size_t e = 0; e < 8; ++e) {
    if (e == 3) {
      EXPECT_NE(env_slice(env.world(), e), before[e]);
      EXPECT_EQ(env.step_count()[e], 0u);
    } else {
      EXPECT_EQ(env_slice(env.world(), e), before[e]) << "env " << e;
      EXPECT_EQ(env.step_count()[e], steps[e]);
    }
  }
}

TEST(Env, ResetAllZeroesStepCount) {
  Env<float> env = make_env<float>("dropout", {}, EnvOptions{.batch = 4});
  env.step(testutil::noop(env));
  env.reset();
  for (auto c : env.step_count()) EXPECT_EQ(c, 0u);
}

TEST(Env, ResetIndexOutOfRange) {
  Env<float> env = make_env<float>("dropout", {}, EnvOptions{.batch = 4});
  EXPECT_THROW(env.reset(4), ContractViolation);
}

TEST(Env, RepeatedResetDrawsFreshSpawn) {
  Env<float> env(std::make_unique<Lonely>(), EnvOptions{.batch = 2});
  const auto first = env_slice(env.world(), 0);
  env.reset(0);
  EXPECT_NE(env_slice(env.world(), 0), first);
}

TEST(Env, NoopInStaticSceneIsFixedPoint) {
  Env<float> env(std::make_unique<Lonely>(), EnvOptions{.batch = 3});
  const auto obs0 = env.observe(std::nullopt);
  const auto r = env.step(testutil::noop(env));
  EXPECT_EQ(r.obs, obs0);
}

TEST(Env, ObservationNoiseOnlyPerturbs) {
  auto s = std::make_unique<Lonely>();
  s->obs_noise = 0.01f;
  Env<float> env(std::move(s), EnvOptions{.batch = 3});
  const auto a = env.observe(std::nullopt);
  const auto b = env.observe(std::nullopt);
  EXPECT_NE(a, b);
  for (std::size_t k = 0; k < a[0].raw().size(); ++k) EXPECT_NEAR(a[0].raw()[k], b[0].raw()[k], 0.1);
}

TEST(Env, HorizonEndsEpisodes) {
  Env<float> env(std::make_unique<Lonely>(), EnvOptions{.batch = 4, .max_steps = 5});
  StepResult<float> r;
  for (int t = 0; t < 4; ++t) {
    r = env.step(testutil::noop(env));
    EXPECT_FALSE(r.dones.any());
  }
  r = env.step(testutil::noop(env));
  for (std::size_t e = 0; e < 4; ++e) EXPECT_TRUE(r.dones[e]);
}

TEST(Env, NoAutoReset) {
  Env<float> env(std::make_unique<Lonely>(), EnvOptions{.batch = 1, .max_steps = 1});
  env.step(testutil::noop(env));
  const auto r = env.step(testutil::noop(env));
  EXPECT_TRUE(r.dones[0]);
  EXPECT_EQ(env.step_count()[0], 2u);
}

TEST(Env, WrongActionCountRejected) {
  Env<float> env = make_env<float>("give_way", {}, EnvOptions{.batch = 2});
  auto acts = testutil::noop(env);
  acts.pop_back();
  EXPECT_THROW(env.step(acts), ContractViolation);
  acts = testutil::noop(env);
  acts[0] = RawAction<float>::continuous(BatchVector<float>(3, 2));
  EXPECT_THROW(env.step(acts), ContractViolation);
}

TEST(Env, OtherEnvActionsDoNotLeak) {
  // B=2 with a push only in env 1 versus a B=1 no-op run.
  Env<float> two = make_env<float>("simple_spread", {}, EnvOptions{.batch = 2, .seed = 9});
  Env<float> one = make_env<float>("simple_spread", {}, EnvOptions{.batch = 1, .seed = 9});
  for (int t = 0; t < 20; ++t) {
    auto acts = testutil::noop(two);
    for (auto& a : acts) a.values(1, 0) = 1;
    const auto r2 = two.step(acts);
    const auto r1 = one.step(testutil::noop(one));
    for (std::size_t a = 0; a < r1.obs.size(); ++a) {
      EXPECT_EQ(r2.obs[a].row(0), r1.obs[a].row(0));
      EXPECT_EQ(r2.rewards[a][0], r1.rewards[a][0]);
    }
  }
}

TEST(SingleEnv, PlainVectorsRoundTrip) {
  SingleEnv<float> env(create_scenario<float>("give_way"), 0, 10);
  const auto obs = env.reset();
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[0].size(), 8u);
  const auto s = env.step({{1, 0}, {-1, 0}});
  EXPECT_EQ(s.rewards.size(), 2u);
  EXPECT_FALSE(s.done);
  EXPECT_TRUE(s.infos[0].count("success"));
}
