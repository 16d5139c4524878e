#include <gtest/gtest.h>

#include <cmath>

#include "batchsim/world.hpp"

using namespace batchsim;

namespace {

template <class T>
Agent<T> ball(const std::string& name, T r, T m = T(1)) {
  return Agent<T>(name, Sphere<T>{r}, m);
}

template <class T>
std::vector<AgentAction<T>> zero_actions(const World<T>& w) {
  return std::vector<AgentAction<T>>(w.policy_agents().size(), AgentAction<T>(w.batch_size(), 0));
}

}  // namespace

TEST(Shapes, MomentOfInertia) {
  EXPECT_DOUBLE_EQ(moment_of_inertia<double>(Sphere<double>{0.5}, 2.0), 2.0 * 0.25 / 2);
  EXPECT_DOUBLE_EQ(moment_of_inertia<double>(Box<double>{2.0, 1.0}, 3.0), 3.0 * 5.0 / 12);
  EXPECT_DOUBLE_EQ(moment_of_inertia<double>(Line<double>{2.0}, 6.0), 6.0 * 4.0 / 12);
}

TEST(Shapes, NonPositiveDimensionsRejected) {
  EXPECT_THROW((Entity<float>("s", Sphere<float>{0.0f}).validate()), ContractViolation);
  EXPECT_THROW((Entity<float>("b", Box<float>{1.0f, -1.0f}).validate()), ContractViolation);
  EXPECT_THROW((Entity<float>("m", Sphere<float>{1.0f}, 0.0f).validate()), ContractViolation);
}

TEST(ClosestPoints, SphereSphereUsesCentres) {
  const auto cp = contact_points<double>(Sphere<double>{0.3}, Pose<double>{{0, 0}, 0}, Sphere<double>{0.4},
                                         Pose<double>{{1, 0}, 0});
  EXPECT_EQ(cp.p_i, (Vec2<double>{0, 0}));
  EXPECT_EQ(cp.p_j, (Vec2<double>{1, 0}));
  EXPECT_DOUBLE_EQ(cp.d_min, 0.7);
}

TEST(ClosestPoints, SphereLineFoot) {
  const auto cp = contact_points<double>(Sphere<double>{0.1}, Pose<double>{{0, 0.5}, 0}, Line<double>{2},
                                         Pose<double>{{0, 0}, 0});
  EXPECT_NEAR(cp.p_j.x, 0, 1e-12);
  EXPECT_NEAR(cp.p_j.y, 0, 1e-12);
  EXPECT_DOUBLE_EQ(cp.d_min, 0.1);
}

TEST(ClosestPoints, SphereBoxProjection) {
  const auto cp = contact_points<double>(Sphere<double>{0.1}, Pose<double>{{2, 0}, 0}, Box<double>{2, 1},
                                         Pose<double>{{0, 0}, 0});
  EXPECT_NEAR(cp.p_j.x, 1, 1e-12);
  EXPECT_NEAR(cp.p_j.y, 0, 1e-12);
}

TEST(ClosestPoints, RotatedBoxMatchesBruteForce) {
  // Dense sampling of the box boundary as an independent oracle.
  const Box<double> box{0.8, 0.3};
  const Pose<double> pose{{0.2, -0.1}, 0.7};
  SeededRng rng(4, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2<double> p{rng.uniform(0, -2.0, 2.0), rng.uniform(0, -2.0, 2.0)};
    const auto cp = contact_points<double>(Sphere<double>{0.05}, Pose<double>{p, 0}, box, pose);
    double best = 1e9;
    constexpr int kN = 4000;
    for (int s = 0; s < kN; ++s) {
      const double t = static_cast<double>(s) / kN * 4;
      Vec2<double> local;
      if (t < 1) local = {-0.4 + 0.8 * t, -0.15};
      else if (t < 2) local = {0.4, -0.15 + 0.3 * (t - 1)};
      else if (t < 3) local = {0.4 - 0.8 * (t - 2), 0.15};
      else local = {-0.4, 0.15 - 0.3 * (t - 3)};
      best = std::min(best, norm(pose.pos + rotate(local, pose.rot) - p));
    }
    EXPECT_NEAR(norm(cp.p_j - p), best, 1e-3);
  }
}

TEST(ClosestPoints, CrossingLinesTouch) {
  const auto cp = contact_points<double>(Line<double>{1}, Pose<double>{{0, 0}, 0}, Line<double>{1},
                                         Pose<double>{{0, 0}, std::numbers::pi / 2});
  EXPECT_NEAR(norm(cp.p_j - cp.p_i), 0, 1e-12);
  EXPECT_DOUBLE_EQ(cp.d_min, kSurfaceSkin<double>);
}

TEST(ClosestPoints, ParallelBoxes) {
  const auto cp = contact_points<double>(Box<double>{1, 1}, Pose<double>{{0, 0}, 0}, Box<double>{1, 1},
                                         Pose<double>{{1.5, 0.2}, 0});
  EXPECT_NEAR(norm(cp.p_j - cp.p_i), 0.5, 1e-12);
}

TEST(ClosestPoints, BatchedMatchesScalar) {
  BatchVec2<float> pi(2), pj(2);
  BatchScalar<float> ri(2), rj(2);
  pj.x = BatchScalar<float>{2.0f, 0.0f};
  pj.y = BatchScalar<float>{0.0f, 0.5f};
  const auto g = closest_points<float>(pi, ri, Box<float>{2, 1}, pj, rj, Sphere<float>{0.1f});
  EXPECT_NEAR(g.p_i.x[0], 1.0f, 1e-6f);
  EXPECT_NEAR(g.p_i.y[1], 0.5f, 1e-6f);
}

TEST(CollisionForce, HandEvaluatedMagnitude) {
  // 100 * 0.001 * ln(1 + e^10)
  const double expected = 100 * 0.001 * std::log1p(std::exp(10.0));
  EXPECT_NEAR(expected, 1.00000454, 1e-8);
  ContactGeometry<double> g{BatchVec2<double>(1, 0, 0), BatchVec2<double>(1, 0.09, 0), BatchScalar<double>(1, 0.1)};
  const auto r = collision_force(g, PhysParams<double>{});
  EXPECT_TRUE(r.active[0]);
  EXPECT_NEAR(std::hypot(r.f_e.x[0], r.f_e.y[0]), 1.00000454, 1.00000454 * 1e-4);
  EXPECT_GT(r.force_on_j.x[0], 0);
  EXPECT_LT(r.force_on_i.x[0], 0);
}

TEST(CollisionForce, FloatMatchesToRelativeTolerance) {
  const Vec2<float> f = contact_force_on_j<float>({0.09f, 0.0f}, 0.1f, 100.0f, 1e-3f, {1, 0});
  EXPECT_NEAR(norm(f), 1.00000454f, 1.00000454f * 1e-4f);
}

TEST(CollisionForce, ZeroBeyondCutoff) {
  const Vec2<float> f = contact_force_on_j<float>({0.2f, 0.0f}, 0.1f, 100.0f, 1e-3f, {1, 0});
  EXPECT_EQ(f.x, 0.0f);
  EXPECT_EQ(f.y, 0.0f);
  ContactGeometry<float> g{BatchVec2<float>(1), BatchVec2<float>(1, 0.2f, 0), BatchScalar<float>(1, 0.1f)};
  const auto r = collision_force(g, PhysParams<float>{});
  EXPECT_FALSE(r.active[0]);
  EXPECT_EQ(r.f_e.x[0], 0.0f);
}

TEST(CollisionForce, SwapNegates) {
  const Vec2<double> a = contact_force_on_j<double>({0.03, -0.04}, 0.1, 100, 1e-3, {1, 0});
  const Vec2<double> b = contact_force_on_j<double>({-0.03, 0.04}, 0.1, 100, 1e-3, {1, 0});
  EXPECT_EQ(a.x, -b.x);
  EXPECT_EQ(a.y, -b.y);
}

TEST(CollisionForce, ExactOverlapUsesFallback) {
  const Vec2<double> f = contact_force_on_j<double>({0, 0}, 0.1, 100, 1e-3, overlap_direction<double>(1));
  EXPECT_EQ(f.x, 0.0);
  EXPECT_GT(f.y, 0.0);
  EXPECT_TRUE(std::isfinite(f.y));
}

TEST(Integrate, DampedVelocityOracle) {
  Entity<double> ent("e", Sphere<double>{0.1}, 1.0);
  ent.state = EntityState<double>(1);
  ent.state.vel.x[0] = 1.0;
  const auto next = integrate(ent, Wrench<double>(1), PhysParams<double>{});
  EXPECT_NEAR(next.vel.x[0], 0.75, 0.75 * 1e-9);
  EXPECT_NEAR(next.pos.x[0], 0.075, 0.075 * 1e-9);
  EXPECT_EQ(next.vel.y[0], 0.0);
}

TEST(Integrate, GravityOracle) {
  World<double> w(1, PhysParams<double>{.dt = 0.1, .damping = 0.0, .gravity = {0, -1}});
  w.add_landmark(Entity<double>("heavy", Sphere<double>{0.1}, 2.0));
  w.step({});
  EXPECT_NEAR(w.landmarks()[0].state.vel.y[0], -0.1, 0.1 * 1e-9);
  EXPECT_EQ(w.landmarks()[0].state.vel.x[0], 0.0);
  EXPECT_NEAR(w.last_wrench(0).force.y[0], -2.0, 1e-12);
}

TEST(Integrate, RestIsFixedPoint) {
  Entity<float> ent("e", Sphere<float>{0.1f});
  ent.state = EntityState<float>(3);
  const auto next = integrate(ent, Wrench<float>(3), PhysParams<float>{});
  EXPECT_EQ(next.pos, ent.state.pos);
  EXPECT_EQ(next.vel, ent.state.vel);
}

TEST(Integrate, AngularRecurrence) {
  Entity<double> ent("e", Line<double>{1.0}, 12.0);  // I = 1
  ent.state = EntityState<double>(1);
  Wrench<double> w(1);
  w.torque[0] = 2.0;
  const auto next = integrate(ent, w, PhysParams<double>{});
  EXPECT_NEAR(next.ang_vel[0], 0.2, 1e-12);
  EXPECT_NEAR(next.rot[0], 0.02, 1e-12);
}

TEST(Integrate, ImmovableAndNonRotatableUntouched) {
  Entity<float> ent("e", Box<float>{1, 1});
  ent.movable = false;
  ent.rotatable = false;
  ent.state = EntityState<float>(1);
  ent.state.vel.x[0] = 3.0f;
  Wrench<float> w(1);
  w.force.x[0] = 10;
  w.torque[0] = 10;
  const auto next = integrate(ent, w, PhysParams<float>{});
  EXPECT_EQ(next.pos, ent.state.pos);
  EXPECT_EQ(next.vel, ent.state.vel);
  EXPECT_EQ(next.rot, ent.state.rot);
}

TEST(WorldStep, ZeroActionAtRestIsFixedPoint) {
  World<float> w(4);
  w.add_agent(ball<float>("a", 0.05f));
  w.agents()[0].set_pos(2, {0.3f, -0.4f});
  const auto before = w.agents()[0].state;
  w.step(zero_actions(w));
  EXPECT_EQ(w.agents()[0].state.pos, before.pos);
  EXPECT_EQ(w.agents()[0].state.vel, before.vel);
}

TEST(WorldStep, SymmetricOverlapGivesOppositeVelocities) {
  World<double> w(1);
  w.add_agent(ball<double>("a", 0.05));
  w.add_agent(ball<double>("b", 0.05));
  w.agents()[0].set_pos(0, {-0.04, 0.3});
  w.agents()[1].set_pos(0, {0.04, 0.3});
  w.step(zero_actions(w));
  const double va = w.agents()[0].state.vel.x[0];
  const double vb = w.agents()[1].state.vel.x[0];
  EXPECT_LT(va, 0);
  EXPECT_EQ(va, -vb);
  EXPECT_EQ(w.agents()[0].state.vel.y[0], 0.0);
}

TEST(WorldStep, ActionCountAndNaNRejected) {
  World<float> w(2);
  w.add_agent(ball<float>("a", 0.05f));
  EXPECT_THROW(w.step({}), ContractViolation);
  std::vector<AgentAction<float>> acts(1, AgentAction<float>(2, 0));
  acts[0].force.x[1] = std::nanf("");
  EXPECT_THROW(w.step(acts), ContractViolation);
}

TEST(WorldStep, DuplicateNamesRejected) {
  World<float> w(1);
  w.add_agent(ball<float>("a", 0.05f));
  EXPECT_THROW(w.add_landmark(Entity<float>("a", Sphere<float>{0.1f})), ContractViolation);
}

TEST(WorldStep, BatchOfThreeEqualsThreeSingles) {
  const std::vector<Vec2<float>> starts = {{0.0f, 0.0f}, {0.06f, 0.01f}, {-0.3f, 0.2f}};
  auto build = [](std::size_t batch) {
    World<float> w(batch);
    w.add_agent(ball<float>("a", 0.05f));
    w.add_landmark(Entity<float>("box", Box<float>{0.3f, 0.1f}, 2.0f));
    w.add_landmark(Entity<float>("wall", Line<float>{1.0f}, 5.0f));
    w.landmarks()[0].set_pos(0, {0.1f, 0.0f});
    w.landmarks()[1].set_pos(0, {0.0f, 0.1f});
    for (std::size_t e = 1; e < batch; ++e) {
      w.landmarks()[0].set_pos(e, {0.1f, 0.0f});
      w.landmarks()[1].set_pos(e, {0.0f, 0.1f});
    }
    return w;
  };
  World<float> big = build(3);
  std::vector<World<float>> singles;
  for (std::size_t e = 0; e < 3; ++e) {
    big.agents()[0].set_pos(e, starts[e]);
    singles.push_back(build(1));
    singles.back().agents()[0].set_pos(0, starts[e]);
  }
  for (int t = 0; t < 100; ++t) {
    std::vector<AgentAction<float>> act(1, AgentAction<float>(3, 0));
    for (std::size_t e = 0; e < 3; ++e) {
      act[0].force.x[e] = std::sin(0.1f * t + e);
      act[0].force.y[e] = std::cos(0.07f * t);
    }
    big.step(act);
    for (std::size_t e = 0; e < 3; ++e) {
      std::vector<AgentAction<float>> one(1, AgentAction<float>(1, 0));
      one[0].force.x[0] = act[0].force.x[e];
      one[0].force.y[0] = act[0].force.y[e];
      singles[e].step(one);
    }
  }
  for (std::size_t e = 0; e < 3; ++e) {
    for (std::size_t i = 0; i < big.n_entities(); ++i) {
      const auto& a = big.entity(i).state;
      const auto& b = singles[e].entity(i).state;
      EXPECT_EQ(a.pos.x[e], b.pos.x[0]);
      EXPECT_EQ(a.pos.y[e], b.pos.y[0]);
      EXPECT_EQ(a.rot[e], b.rot[0]);
    }
  }
}

TEST(WorldStep, DampingDecay) {
  World<double> w(1);
  w.add_landmark(Entity<double>("p", Sphere<double>{0.05}));
  w.landmarks()[0].set_vel(0, {0.6, -0.8});
  for (int t = 1; t <= 50; ++t) {
    w.step({});
    const double expect = std::pow(0.75, t);
    EXPECT_NEAR(norm(w.landmarks()[0].vel(0)), expect, expect * 1e-9);
  }
}

TEST(WorldStep, MaxSpeedHolds) {
  World<float> w(8);
  Agent<float> a = ball<float>("a", 0.05f);
  a.max_speed = 0.3f;
  a.u_range = 5.0f;
  w.add_agent(std::move(a));
  std::vector<AgentAction<float>> act(1, AgentAction<float>(8, 0));
  act[0].force.fill(5.0f, -3.0f);
  for (int t = 0; t < 20; ++t) {
    w.step(act);
    for (std::size_t e = 0; e < 8; ++e) ASSERT_LE(norm(w.agents()[0].vel(e)), 0.3f + 1e-6f);
  }
}

TEST(WorldStep, ImmovableLandmarkBitwiseUnchanged) {
  World<float> w(2);
  w.add_agent(ball<float>("a", 0.1f));
  Entity<float> wall("wall", Box<float>{1, 0.1f});
  wall.movable = false;
  wall.rotatable = false;
  w.add_landmark(std::move(wall));
  w.landmarks()[0].set_pos(0, {0.0f, 0.12f});
  const auto before = w.landmarks()[0].state;
  std::vector<AgentAction<float>> act(1, AgentAction<float>(2, 0));
  act[0].force.fill(0.0f, 1.0f);
  for (int t = 0; t < 10; ++t) w.step(act);
  EXPECT_EQ(w.landmarks()[0].state.pos, before.pos);
  EXPECT_EQ(w.landmarks()[0].state.vel, before.vel);
  EXPECT_EQ(w.landmarks()[0].state.rot, before.rot);
  EXPECT_EQ(w.landmarks()[0].state.ang_vel, before.ang_vel);
  EXPECT_LT(w.agents()[0].pos(0).y, 0.12f);
}

TEST(WorldStep, NewtonThirdLawInWorld) {
  World<double> w(1);
  w.add_landmark(Entity<double>("a", Box<double>{0.4, 0.2}));
  w.add_landmark(Entity<double>("b", Sphere<double>{0.1}));
  w.landmarks()[1].set_pos(0, {0.25, 0.05});
  w.step({});
  const auto fa = w.last_wrench(0).force;
  const auto fb = w.last_wrench(1).force;
  EXPECT_GT(std::abs(fa.x[0]), 0.0);
  EXPECT_EQ(fa.x[0] + fb.x[0], 0.0);
  EXPECT_EQ(fa.y[0] + fb.y[0], 0.0);
}

TEST(WorldStep, OffCentreHitSpinsLineTheRightWay) {
  // Sphere pressing up into the right half of a horizontal line: the line must
  // turn counter-clockwise (positive angular velocity).
  World<double> w(1);
  w.add_landmark(Entity<double>("line", Line<double>{2.0}, 5.0));
  w.add_landmark(Entity<double>("ball", Sphere<double>{0.1}));
  w.landmarks()[0].movable = false;
  w.landmarks()[1].set_pos(0, {0.7, -0.095});
  w.step({});
  EXPECT_GT(w.landmarks()[0].state.ang_vel[0], 0.0);
  EXPECT_GT(w.last_wrench(0).torque[0], 0.0);
}

TEST(WorldStep, RepulsionSeparatesPenetratingPairs) {
  const Shape<double> shapes[] = {Sphere<double>{0.1}, Box<double>{0.3, 0.2}, Line<double>{0.4}};
  for (const auto& si : shapes) {
    for (const auto& sj : shapes) {
      World<double> w(1, PhysParams<double>{.damping = 0.0});
      w.add_landmark(Entity<double>("i", si));
      w.add_landmark(Entity<double>("j", sj));
      w.landmarks()[0].rotatable = false;
      w.landmarks()[1].rotatable = false;
      w.landmarks()[1].set_pos(0, {0.12, 0.05});
      w.landmarks()[1].state.rot[0] = 1.0;
      const auto before = contact_points(si, w.landmarks()[0].pose(0), sj, w.landmarks()[1].pose(0));
      const double d0 = norm(before.p_j - before.p_i);
      ASSERT_LE(d0, before.d_min);
      w.step({});
      const auto after = contact_points(si, w.landmarks()[0].pose(0), sj, w.landmarks()[1].pose(0));
      EXPECT_GE(norm(after.p_j - after.p_i), d0) << shape_kind(si) << " vs " << shape_kind(sj);
    }
  }
}

TEST(WorldStep, CollisionFilterDisablesPair) {
  World<double> w(1);
  w.add_landmark(Entity<double>("a", Sphere<double>{0.1}));
  w.add_landmark(Entity<double>("b", Sphere<double>{0.1}));
  w.landmarks()[1].set_pos(0, {0.05, 0});
  w.set_collision_filter([](const Entity<double>& a, const Entity<double>& b) { return !(a.name == "a" && b.name == "b"); });
  w.step({});
  EXPECT_EQ(w.landmarks()[0].vel(0), (Vec2<double>{}));
}

TEST(WorldStep, ScriptedAgentsActBeforeForces) {
  World<double> w(2);
  Agent<double> s = ball<double>("scripted", 0.05);
  s.action_script = [](World<double>&, Agent<double>& self) { self.action.force.fill(1.0, 0.0); };
  w.add_agent(ball<double>("free", 0.05));
  w.add_agent(std::move(s));
  w.agents()[0].set_pos(0, {5, 5});
  w.agents()[0].set_pos(1, {5, 5});
  EXPECT_EQ(w.policy_agents(), (std::vector<std::size_t>{0}));
  std::vector<AgentAction<double>> act(1, AgentAction<double>(2, 0));
  w.step(act);
  EXPECT_NEAR(w.agents()[1].vel(0).x, 0.1, 1e-12);
  EXPECT_NEAR(w.agents()[1].vel(1).x, 0.1, 1e-12);
}

TEST(WorldStep, ThreadedMatchesSerial) {
  constexpr std::size_t B = 4096;
  auto run = [&](int threads) {
    set_num_threads(threads);
    World<float> w(B, PhysParams<float>{}, 3);
    for (int i = 0; i < 3; ++i) w.add_agent(ball<float>("a" + std::to_string(i), 0.1f));
    for (std::size_t e = 0; e < B; ++e) {
      for (int i = 0; i < 3; ++i) w.agents()[i].set_pos(e, {0.05f * i, 0.001f * static_cast<float>(e % 7)});
    }
    auto acts = zero_actions(w);
    for (int t = 0; t < 5; ++t) w.step(acts);
    set_num_threads(1);
    return w.agents()[1].state;
  };
  const auto a = run(1);
  const auto b = run(4);
  EXPECT_EQ(a.pos, b.pos);
  EXPECT_EQ(a.vel, b.vel);
}
