#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace batchsim;

TEST(Bench, OneRowPerCount) {
  const auto rows = bench_throughput<float>("simple_spread", {1, 2}, 3, BenchMode::vectorized);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n_envs, 1u);
  EXPECT_EQ(rows[1].n_envs, 2u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.seconds.has_value());
    EXPECT_GT(*r.seconds, 0);
    EXPECT_EQ(r.n_steps, 3u);
  }
}

TEST(Bench, RejectsBadCounts) {
  EXPECT_THROW(bench_throughput<float>("simple_spread", {}, 3, BenchMode::vectorized), ContractViolation);
  EXPECT_THROW(bench_throughput<float>("simple_spread", {4, 2}, 3, BenchMode::vectorized), ContractViolation);
  EXPECT_THROW(bench_throughput<float>("nope", {1}, 3, BenchMode::vectorized), ContractViolation);
}

TEST(Bench, CsvSchemaAndOrder) {
  std::vector<BenchRow> rows = {{2, BenchMode::vectorized, 10, 0.5},
                                {1, BenchMode::vectorized, 10, 0.25},
                                {1, BenchMode::sequential, 10, std::nullopt}};
  std::ostringstream out;
  write_bench_csv(out, rows);
  EXPECT_EQ(out.str(),
            "n_envs,mode,steps,seconds\n"
            "1,sequential,10,failed\n"
            "1,vectorized,10,0.25\n"
            "2,vectorized,10,0.5\n");
}

TEST(Bench, TimingDoesNotChangeTrajectories) {
  // The benchmark drives envs exactly like an untimed loop with the same seed.
  Env<float> a(create_scenario<float>("simple_spread"), EnvOptions{.batch = 4, .seed = 0});
  Env<float> b(create_scenario<float>("simple_spread"), EnvOptions{.batch = 4, .seed = 0});
  RandomPolicy<float> ra(0, 4);
  RandomPolicy<float> rb(0, 4);
  for (int t = 0; t < 20; ++t) {
    const auto x = a.step(ra(a));
    const auto y = b.step(rb(b));
    EXPECT_EQ(x.obs, y.obs);
  }
}

TEST(Bench, SequentialMatchesVectorizedSemantics) {
  // A B=1 env with stream_offset e replays env e of the batch.
  Env<float> batch(create_scenario<float>("flocking"), EnvOptions{.batch = 4, .seed = 8});
  Env<float> single(create_scenario<float>("flocking"), EnvOptions{.batch = 1, .seed = 8, .stream_offset = 2});
  EXPECT_EQ(batch.observe(std::nullopt)[0].row(2), single.observe(std::nullopt)[0].row(0));
}
