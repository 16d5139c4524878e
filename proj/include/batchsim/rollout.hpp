#pragma once

// Episode rollouts with a heuristic or uniform-random policy.

#include <cstdint>
#include <vector>

#include "batchsim/env.hpp"
#include "batchsim/scenarios/common.hpp"

namespace batchsim {

/// Continuous actions for every policy agent from a per-agent callback
/// (observation row in, action row out). Movement outputs are in [-1, 1] and
/// get scaled by the agent's u_range.
template <std::floating_point T>
std::vector<RawAction<T>> policy_actions(const Env<T>& env, const std::vector<BatchVector<T>>& obs,
                                         const HeuristicPolicy<T>& policy) {
  const std::size_t B = env.batch_size();
  std::vector<RawAction<T>> out;
  out.reserve(env.n_agents());
  std::vector<T> row;
  std::vector<T> act;
  for (std::size_t a = 0; a < env.n_agents(); ++a) {
    const std::size_t width = env.action_spec(a).continuous_dim();
    BatchVector<T> v(B, width);
    act.assign(width, T(0));
    for (std::size_t e = 0; e < B; ++e) {
      row = obs[a].row(e);
      std::fill(act.begin(), act.end(), T(0));
      policy.act(row, act);
      act[0] *= env.action_spec(a).u_range;
      act[1] *= env.action_spec(a).u_range;
      v.set_row(e, act);
    }
    out.push_back(RawAction<T>::continuous(std::move(v)));
  }
  return out;
}

/// Uniform movement in [-u_range, u_range] (communication in [-1, 1]) from its
/// own generator, so the environment's random streams are not disturbed.
template <std::floating_point T>
class RandomPolicy {
 public:
  /// `stream_offset` works as for environments: a batch-1 policy with offset e
  /// draws what env e of a larger batch would.
  RandomPolicy(std::uint64_t seed, std::size_t batch, std::size_t stream_offset = 0)
      : rng_(seed ^ 0x5EEDF00DULL, batch, stream_offset) {}

  std::vector<RawAction<T>> operator()(const Env<T>& env) {
    std::vector<RawAction<T>> out;
    out.reserve(env.n_agents());
    for (std::size_t a = 0; a < env.n_agents(); ++a) {
      BatchVector<T> v(env.batch_size(), env.action_spec(a).continuous_dim());
      for (std::size_t k = 0; k < v.dim(); ++k) {
        const T hi = k < env.action_spec(a).movement_dims ? env.action_spec(a).u_range : T(1);
        T* col = v.column(k);
        for (std::size_t e = 0; e < v.batch(); ++e) col[e] = rng_.uniform(e, -hi, hi);
      }
      out.push_back(RawAction<T>::continuous(std::move(v)));
    }
    return out;
  }

 private:
  SeededRng rng_;
};

namespace detail {

template <std::floating_point T, class Act>
BatchScalar<T> run_episode_with(Env<T>& env, std::size_t max_steps, Act&& act) {
  const std::size_t B = env.batch_size();
  std::vector<BatchVector<T>> obs = env.reset();
  BatchScalar<T> ret(B, T(0));
  std::vector<std::uint8_t> done(B, 0);
  for (std::size_t t = 0; t < max_steps; ++t) {
    StepResult<T> r = env.step(act(obs));
    bool all_done = true;
    for (std::size_t e = 0; e < B; ++e) {
      if (done[e]) continue;
      T mean = 0;
      for (const auto& rew : r.rewards) mean += rew[e];
      if (!r.rewards.empty()) mean /= static_cast<T>(r.rewards.size());
      ret[e] += mean;
      if (r.dones[e]) done[e] = 1;
      all_done = all_done && done[e];
    }
    obs = std::move(r.obs);
    if (all_done) break;
  }
  return ret;
}

}  // namespace detail

/// Resets every environment and sums the mean-over-agents reward of each one
/// until it is done or `max_steps` have run.
template <std::floating_point T>
BatchScalar<T> run_episode(Env<T>& env, const HeuristicPolicy<T>& policy, std::size_t max_steps) {
  return detail::run_episode_with(env, max_steps, [&](const auto& obs) { return policy_actions(env, obs, policy); });
}

template <std::floating_point T>
BatchScalar<T> run_random_episode(Env<T>& env, std::uint64_t seed, std::size_t max_steps) {
  RandomPolicy<T> random(seed, env.batch_size());
  return detail::run_episode_with(env, max_steps, [&](const auto&) { return random(env); });
}

}  // namespace batchsim
