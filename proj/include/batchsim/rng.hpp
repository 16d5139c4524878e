#pragma once

// Per-environment counter-based random streams.
//
// Every environment owns an independent stream keyed by (seed, stream id) and a
// draw counter. Draws for environment e never touch another environment's
// counter, so resetting one environment leaves the others' future samples
// unchanged, and a single-environment world can replay stream e of a larger
// batch exactly by using the same stream offset.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "batchsim/batch.hpp"
#include "batchsim/vec2.hpp"

namespace batchsim {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class SeededRng {
 public:
  SeededRng() = default;
  /// `stream_offset` is the global index of local environment 0.
  SeededRng(std::uint64_t seed, std::size_t batch, std::size_t stream_offset = 0)
      : seed_(seed), offset_(stream_offset), counters_(batch, 0) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t batch() const noexcept { return counters_.size(); }
  std::size_t stream_offset() const noexcept { return offset_; }
  std::uint64_t position(std::size_t e) const noexcept { return counters_[e]; }

  std::uint64_t next_u64(std::size_t e) noexcept {
    const std::uint64_t key = detail::splitmix64(seed_ ^ detail::splitmix64(offset_ + e + 1));
    return detail::splitmix64(key + 0xD1B54A32D192ED03ULL * (++counters_[e]));
  }

  /// Uniform in [0, 1).
  template <std::floating_point T>
  T uniform01(std::size_t e) noexcept {
    if constexpr (sizeof(T) == 4) {
      return static_cast<T>(next_u64(e) >> 40) * T(0x1.0p-24);
    } else {
      return static_cast<T>(next_u64(e) >> 11) * T(0x1.0p-53);
    }
  }

  template <std::floating_point T>
  T uniform(std::size_t e, T lo, T hi) noexcept {
    return lo + (hi - lo) * uniform01<T>(e);
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::size_t e, std::uint64_t n) noexcept { return next_u64(e) % n; }

  /// Standard normal via Box-Muller; consumes two draws.
  template <std::floating_point T>
  T normal(std::size_t e) noexcept {
    const double u1 = 1.0 - static_cast<double>(next_u64(e) >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64(e) >> 11) * 0x1.0p-53;
    return static_cast<T>(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
  }

 private:
  std::uint64_t seed_ = 0;
  std::size_t offset_ = 0;
  std::vector<std::uint64_t> counters_;
};

/// Environments touched by a reset: one index, or all of them.
using EnvSelection = std::optional<std::size_t>;

template <class F>
void for_selected(EnvSelection sel, std::size_t batch, F&& f) {
  if (sel) {
    f(*sel);
  } else {
    for (std::size_t e = 0; e < batch; ++e) f(e);
  }
}

/// Draws one point per environment, uniform in the box [lo, hi].
template <std::floating_point T>
BatchVec2<T> uniform_in_box(SeededRng& rng, Vec2<T> lo, Vec2<T> hi, std::size_t batch) {
  require(lo.x <= hi.x && lo.y <= hi.y, "uniform_in_box: lo must not exceed hi");
  require(batch == rng.batch(), "uniform_in_box: batch size differs from rng streams");
  BatchVec2<T> out(batch);
  for (std::size_t e = 0; e < batch; ++e) {
    out.x[e] = rng.uniform(e, lo.x, hi.x);
    out.y[e] = rng.uniform(e, lo.y, hi.y);
  }
  return out;
}

/// In-place variant restricted to the selected environments.
template <std::floating_point T>
void sample_in_box(SeededRng& rng, Vec2<T> lo, Vec2<T> hi, BatchVec2<T>& out, EnvSelection sel) {
  require(lo.x <= hi.x && lo.y <= hi.y, "sample_in_box: lo must not exceed hi");
  for_selected(sel, out.size(), [&](std::size_t e) {
    out.x[e] = rng.uniform(e, lo.x, hi.x);
    out.y[e] = rng.uniform(e, lo.y, hi.y);
  });
}

}  // namespace batchsim
