#pragma once

// Throughput benchmark: one batched Env against a loop of B single-env Envs.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "batchsim/registry.hpp"
#include "batchsim/rollout.hpp"

namespace batchsim {

enum class BenchMode { vectorized, sequential };

inline std::string_view to_string(BenchMode m) { return m == BenchMode::vectorized ? "vectorized" : "sequential"; }

struct BenchRow {
  std::size_t n_envs = 0;
  BenchMode mode = BenchMode::vectorized;
  std::size_t n_steps = 0;
  /// Empty when the run failed (e.g. out of memory).
  std::optional<double> seconds;
};

inline constexpr std::size_t kBenchWarmup = 5;

namespace detail {

template <std::floating_point T>
double time_vectorized(std::string_view scenario, std::size_t B, std::size_t steps, std::uint64_t seed) {
  Env<T> env(create_scenario<T>(scenario), EnvOptions{.batch = B, .seed = seed});
  RandomPolicy<T> random(seed, B);
  for (std::size_t t = 0; t < kBenchWarmup; ++t) env.step(random(env));
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < steps; ++t) env.step(random(env));
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <std::floating_point T>
double time_sequential(std::string_view scenario, std::size_t B, std::size_t steps, std::uint64_t seed) {
  std::vector<Env<T>> envs;
  std::vector<RandomPolicy<T>> randoms;
  envs.reserve(B);
  randoms.reserve(B);
  for (std::size_t e = 0; e < B; ++e) {
    envs.emplace_back(create_scenario<T>(scenario), EnvOptions{.batch = 1, .seed = seed, .stream_offset = e});
    randoms.emplace_back(seed, 1, e);
  }
  for (std::size_t t = 0; t < kBenchWarmup; ++t) {
    for (std::size_t e = 0; e < B; ++e) envs[e].step(randoms[e](envs[e]));
  }
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t e = 0; e < B; ++e) envs[e].step(randoms[e](envs[e]));
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Times `n_steps` random-action steps for each environment count. A count
/// that throws (allocation failure, say) yields a row without seconds.
template <std::floating_point T = float>
std::vector<BenchRow> bench_throughput(std::string_view scenario, const std::vector<std::size_t>& env_counts,
                                       std::size_t n_steps, BenchMode mode, std::uint64_t seed = 0) {
  require(!env_counts.empty(), "bench: env_counts must not be empty");
  require(std::is_sorted(env_counts.begin(), env_counts.end()), "bench: env_counts must be ascending");
  require(is_scenario(scenario), "bench: unknown scenario '" + std::string(scenario) + "'");
  std::vector<BenchRow> rows;
  for (std::size_t B : env_counts) {
    require(B >= 1, "bench: env counts must be >= 1");
    BenchRow row{B, mode, n_steps, std::nullopt};
    try {
      row.seconds = mode == BenchMode::vectorized ? detail::time_vectorized<T>(scenario, B, n_steps, seed)
                                                  : detail::time_sequential<T>(scenario, B, n_steps, seed);
      // A zero reading from a coarse clock would break the seconds > 0 rule.
      row.seconds = std::max(*row.seconds, 1e-9);
    } catch (const std::bad_alloc&) {
      row.seconds.reset();
    }
    rows.push_back(row);
  }
  return rows;
}

/// CSV with header `n_envs,mode,steps,seconds`, rows sorted by mode then
/// n_envs; failed rows carry `failed` in the seconds column.
inline void write_bench_csv(std::ostream& out, std::vector<BenchRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.mode != b.mode) return to_string(a.mode) < to_string(b.mode);
    return a.n_envs < b.n_envs;
  });
  out << "n_envs,mode,steps,seconds\n";
  for (const BenchRow& r : rows) {
    out << r.n_envs << ',' << to_string(r.mode) << ',' << r.n_steps << ',';
    if (r.seconds) {
      out << *r.seconds;
    } else {
      out << "failed";
    }
    out << '\n';
  }
}

}  // namespace batchsim
