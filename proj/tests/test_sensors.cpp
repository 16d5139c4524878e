#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "batchsim/sensors.hpp"

using namespace batchsim;

namespace {

World<double> world_with(std::size_t batch, Entity<double> obstacle, Vec2<double> at) {
  World<double> w(batch);
  w.add_agent(Agent<double>("me", Sphere<double>{0.05}));
  obstacle.movable = false;
  w.add_landmark(std::move(obstacle));
  for (std::size_t e = 0; e < batch; ++e) w.landmarks()[0].set_pos(e, at);
  return w;
}

// Geometric oracle: foot of the perpendicular from the centre onto the ray.
double circle_oracle(Vec2<double> o, double angle, Vec2<double> c, double r) {
  const Vec2<double> d{std::cos(angle), std::sin(angle)};
  const double along = dot(c - o, d);
  const double perp2 = dot(c - o, c - o) - along * along;
  if (perp2 > r * r || along <= 0) return INFINITY;
  return along - std::sqrt(r * r - perp2);
}

// Oracle: solve o + t d = a + u (b - a) with a 2x2 system in explicit form.
double segment_oracle(Vec2<double> o, double angle, Vec2<double> a, Vec2<double> b) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double ex = b.x - a.x, ey = b.y - a.y;
  // [dx -ex; dy -ey] [t; u] = [a - o]
  const double det = dx * (-ey) - (-ex) * dy;
  if (std::abs(det) < 1e-14) return INFINITY;
  const double rx = a.x - o.x, ry = a.y - o.y;
  const double t = (rx * (-ey) - (-ex) * ry) / det;
  const double u = (dx * ry - dy * rx) / det;
  if (t <= 0 || u < 0 || u > 1) return INFINITY;
  return t;
}

// Oracle: nearest of the four edge hits.
double rectangle_oracle(Vec2<double> o, double angle, Vec2<double> c, double rot, double l, double wd) {
  Vec2<double> k[4] = {{-l / 2, -wd / 2}, {l / 2, -wd / 2}, {l / 2, wd / 2}, {-l / 2, wd / 2}};
  for (auto& p : k) p = c + rotate(p, rot);
  double best = INFINITY;
  for (int i = 0; i < 4; ++i) best = std::min(best, segment_oracle(o, angle, k[i], k[(i + 1) % 4]));
  return best;
}

}  // namespace

TEST(CastRay, EmptyWorldReadsMaxRange) {
  World<float> w(3);
  w.add_agent(Agent<float>("me", Sphere<float>{0.05f}));
  const auto r = cast_ray(w.agents()[0].state.pos, BatchScalar<float>(3, 0.3f), w, 0.5f, "me");
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(r[e], 0.5f);
}

TEST(CastRay, CircleAhead) {
  auto w = world_with(1, Entity<double>("o", Sphere<double>{0.2}), {1, 0});
  const auto r = cast_ray(BatchVec2<double>(1), BatchScalar<double>(1, 0.0), w, 5.0, "me");
  EXPECT_NEAR(r[0], 0.8, 1e-12);
}

TEST(CastRay, CircleBehind) {
  auto w = world_with(1, Entity<double>("o", Sphere<double>{0.2}), {-1, 0});
  const auto r = cast_ray(BatchVec2<double>(1), BatchScalar<double>(1, 0.0), w, 5.0, "me");
  EXPECT_EQ(r[0], 5.0);
}

TEST(CastRay, NonCollidableAndExcludedIgnored) {
  Entity<double> ghost("o", Sphere<double>{0.2});
  ghost.collidable = false;
  auto w = world_with(1, ghost, {1, 0});
  EXPECT_EQ(cast_ray(BatchVec2<double>(1), BatchScalar<double>(1, 0.0), w, 5.0, "me")[0], 5.0);
  auto w2 = world_with(1, Entity<double>("o", Sphere<double>{0.2}), {1, 0});
  EXPECT_EQ(cast_ray(BatchVec2<double>(1, 0.5, 0.0), BatchScalar<double>(1, 0.0), w2, 5.0, "o")[0], 5.0);
}

TEST(LidarScan, EmptyWorld) {
  World<float> w(2);
  w.add_agent(Agent<float>("me", Sphere<float>{0.05f}));
  const Lidar<float> lidar{.n_rays = 4, .max_range = 0.35f};
  const auto scan = lidar_scan(w.agents()[0], lidar, w);
  ASSERT_EQ(scan.dim(), 4u);
  for (float v : scan.raw()) EXPECT_EQ(v, 0.35f);
}

TEST(LidarScan, ObstacleDueEast) {
  auto w = world_with(1, Entity<double>("o", Sphere<double>{0.1}), {0.3, 0});
  const Lidar<double> lidar{.n_rays = 4, .max_range = 1.0};
  const auto scan = lidar_scan(w.agents()[0], lidar, w);
  EXPECT_NEAR(scan(0, 0), 0.2, 1e-12);
  EXPECT_EQ(scan(0, 1), 1.0);
  EXPECT_EQ(scan(0, 2), 1.0);
  EXPECT_EQ(scan(0, 3), 1.0);
}

TEST(LidarScan, AttachedRotationTurnsRays) {
  auto w = world_with(1, Entity<double>("o", Sphere<double>{0.1}), {0.0, 0.3});
  w.agents()[0].state.rot[0] = std::numbers::pi / 2;
  const Lidar<double> lidar{.n_rays = 4, .max_range = 1.0};
  EXPECT_NEAR(lidar_scan(w.agents()[0], lidar, w)(0, 0), 0.2, 1e-12);
  Lidar<double> world_frame = lidar;
  world_frame.attach_rotation = false;
  EXPECT_NEAR(lidar_scan(w.agents()[0], world_frame, w)(0, 1), 0.2, 1e-12);
}

TEST(LidarScan, DuplicatedSceneGivesIdenticalScans) {
  auto w = world_with(5, Entity<double>("o", Box<double>{0.3, 0.2}), {0.2, 0.1});
  const auto scan = lidar_scan(w.agents()[0], Lidar<double>{}, w);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_EQ(scan.row(e), scan.row(0));
}

TEST(LidarScan, NeverSeesItself) {
  World<double> w(1);
  w.add_agent(Agent<double>("me", Sphere<double>{0.5}));
  const auto scan = lidar_scan(w.agents()[0], Lidar<double>{}, w);
  for (double v : scan.raw()) EXPECT_EQ(v, 0.35);
}

TEST(RayPrimitives, RandomisedAgainstOracles) {
  SeededRng rng(17, 1);
  auto u = [&](double lo, double hi) { return rng.uniform(0, lo, hi); };
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2<double> o{u(-1, 1), u(-1, 1)};
    const double angle = u(-4, 4);
    const Vec2<double> d{std::cos(angle), std::sin(angle)};
    const Vec2<double> c{u(-1, 1), u(-1, 1)};
    const double r = u(0.05, 0.5);
    if (norm(c - o) > r) {
      const double got = ray::circle(o, d, c, r);
      const double want = circle_oracle(o, angle, c, r);
      if (std::isfinite(want)) ++hits;
      ASSERT_EQ(std::isfinite(got), std::isfinite(want));
      if (std::isfinite(want)) {
        ASSERT_NEAR(got, want, 1e-6);
      }
    }
    const Vec2<double> a{u(-1, 1), u(-1, 1)}, b{u(-1, 1), u(-1, 1)};
    {
      const double got = ray::segment(o, d, a, b);
      const double want = segment_oracle(o, angle, a, b);
      ASSERT_EQ(std::isfinite(got), std::isfinite(want));
      if (std::isfinite(want)) {
        ASSERT_NEAR(got, want, 1e-6);
      }
    }
    const double rot = u(-3, 3), l = u(0.1, 0.8), wd = u(0.1, 0.8);
    if (!geom::inside_box(o, Box<double>{l, wd}, Pose<double>{c, rot})) {
      const double got = ray::rectangle(o, d, c, rot, l, wd);
      const double want = rectangle_oracle(o, angle, c, rot, l, wd);
      ASSERT_EQ(std::isfinite(got), std::isfinite(want)) << i;
      if (std::isfinite(want)) {
        ASSERT_NEAR(got, want, 1e-6);
      }
    }
  }
  EXPECT_GT(hits, 100);
}

TEST(LidarScan, RangesInBoundsAndShrinkingNeverShortens) {
  SeededRng rng(23, 1);
  auto u = [&](double lo, double hi) { return rng.uniform(0, lo, hi); };
  for (int i = 0; i < 200; ++i) {
    const double r = u(0.05, 0.3), l = u(0.1, 0.6), wd = u(0.1, 0.6);
    const Vec2<double> at{u(-0.6, 0.6), u(-0.6, 0.6)};
    const double rot = u(-3, 3);
    auto scan_with = [&](double scale) {
      World<double> w(1);
      w.add_agent(Agent<double>("me", Sphere<double>{0.05}));
      w.add_landmark(Entity<double>("s", Sphere<double>{r * scale}));
      w.add_landmark(Entity<double>("b", Box<double>{l * scale, wd * scale}));
      w.landmarks()[0].set_pos(0, at);
      w.landmarks()[1].set_pos(0, {-at.y, at.x});
      w.landmarks()[1].state.rot[0] = rot;
      return lidar_scan(w.agents()[0], Lidar<double>{.n_rays = 24, .max_range = 0.8}, w);
    };
    const auto big = scan_with(1.0);
    const auto small = scan_with(0.6);
    // The property is stated for origins outside the obstacles.
    const bool outside = norm(at) > r && !geom::inside_box(Vec2<double>{}, Box<double>{l, wd}, Pose<double>{{-at.y, at.x}, rot});
    for (std::size_t m = 0; m < 24; ++m) {
      ASSERT_GT(big(0, m), 0.0);
      ASSERT_LE(big(0, m), 0.8);
      ASSERT_TRUE(std::isfinite(small(0, m)));
      if (outside) {
        ASSERT_GE(small(0, m), big(0, m) - 1e-12);
      }
    }
  }
}
