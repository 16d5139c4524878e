#pragma once

// Vectorized environment: action decoding, per-index reset and the step
// pipeline around a Scenario.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "batchsim/scenario.hpp"

namespace batchsim {

enum class ActionMode { continuous, discrete };

/// Number of discrete movement actions: no-op, +x, -x, +y, -y.
inline constexpr std::size_t kDiscreteMoves = 5;

template <std::floating_point T>
struct ActionSpec {
  ActionMode mode = ActionMode::continuous;
  std::size_t movement_dims = 2;
  std::size_t comm_dim = 0;
  std::size_t discrete_cardinality = kDiscreteMoves;
  T u_range = T(1);

  /// Width of a continuous raw action (movement followed by communication).
  std::size_t continuous_dim() const noexcept { return movement_dims + comm_dim; }
};

/// Caller-side action for one agent across the batch.
///
/// Continuous: `values` is batch x (2 + comm_dim). Discrete: `movement` holds one
/// index in [0, 5) per environment and `comm` one index in [0, comm_dim) per
/// environment when the agent communicates.
template <std::floating_point T>
struct RawAction {
  BatchVector<T> values;
  std::vector<std::int64_t> movement;
  std::vector<std::int64_t> comm;

  static RawAction continuous(BatchVector<T> v) { return {std::move(v), {}, {}}; }
  static RawAction discrete(std::vector<std::int64_t> move, std::vector<std::int64_t> comm_idx = {}) {
    return {{}, std::move(move), std::move(comm_idx)};
  }
};

template <std::floating_point T>
struct StepResult {
  std::vector<BatchVector<T>> obs;
  std::vector<BatchScalar<T>> rewards;
  BatchMask dones;
  std::vector<InfoMap<T>> infos;
};

/// Decodes one agent's raw action into forces (and communication).
template <std::floating_point T>
AgentAction<T> decode_action(const RawAction<T>& raw, const ActionSpec<T>& spec, const Agent<T>& agent,
                             SeededRng& rng) {
  const std::size_t batch = rng.batch();
  const std::size_t comm_dim = agent.effective_comm_dim();
  AgentAction<T> out(batch, comm_dim);
  const T u = agent.u_range;
  if (spec.mode == ActionMode::continuous) {
    require(raw.values.batch() == batch, "decode_action: batch size mismatch for '" + agent.name + "'");
    require(raw.values.dim() == spec.continuous_dim(), "decode_action: expected action width " +
                                                           std::to_string(spec.continuous_dim()) + " for '" +
                                                           agent.name + "'");
    require(all_finite(raw.values), "decode_action: non-finite action for '" + agent.name + "'");
    for (std::size_t e = 0; e < batch; ++e) {
      out.force.x[e] = std::clamp(raw.values(e, 0), -u, u) * agent.u_multiplier;
      out.force.y[e] = std::clamp(raw.values(e, 1), -u, u) * agent.u_multiplier;
    }
    for (std::size_t k = 0; k < comm_dim; ++k) {
      std::copy_n(raw.values.column(spec.movement_dims + k), batch, out.comm.column(k));
    }
  } else {
    require(raw.movement.size() == batch, "decode_action: batch size mismatch for '" + agent.name + "'");
    const T f = u * agent.u_multiplier;
    for (std::size_t e = 0; e < batch; ++e) {
      const std::int64_t idx = raw.movement[e];
      require(idx >= 0 && idx < static_cast<std::int64_t>(kDiscreteMoves),
              "decode_action: discrete action " + std::to_string(idx) + " out of range for '" + agent.name + "'");
      constexpr int kDx[kDiscreteMoves] = {0, 1, -1, 0, 0};
      constexpr int kDy[kDiscreteMoves] = {0, 0, 0, 1, -1};
      out.force.x[e] = static_cast<T>(kDx[idx]) * f;
      out.force.y[e] = static_cast<T>(kDy[idx]) * f;
    }
    if (comm_dim > 0) {
      require(raw.comm.size() == batch, "decode_action: missing communication indices for '" + agent.name + "'");
      for (std::size_t e = 0; e < batch; ++e) {
        const std::int64_t c = raw.comm[e];
        require(c >= 0 && c < static_cast<std::int64_t>(comm_dim),
                "decode_action: communication index out of range for '" + agent.name + "'");
        out.comm(e, static_cast<std::size_t>(c)) = T(1);
      }
    }
  }
  if (agent.action_noise_std > T(0)) {
    for (std::size_t e = 0; e < batch; ++e) {
      out.force.x[e] += agent.action_noise_std * rng.normal<T>(e);
      out.force.y[e] += agent.action_noise_std * rng.normal<T>(e);
    }
  }
  return out;
}

struct EnvOptions {
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  /// No horizon when empty.
  std::optional<std::size_t> max_steps = std::nullopt;
  ActionMode mode = ActionMode::continuous;
  /// Global environment index of local env 0 (random stream selection).
  std::size_t stream_offset = 0;
};

template <std::floating_point T>
class Env {
 public:
  Env(std::unique_ptr<Scenario<T>> scenario, const EnvOptions& opts)
      : scenario_(std::move(scenario)), opts_(opts), world_(make(*scenario_, opts)) {
    policy_ = world_.policy_agents();
    for (std::size_t a : policy_) {
      const Agent<T>& agent = world_.agents()[a];
      ActionSpec<T> spec;
      spec.mode = opts.mode;
      spec.comm_dim = agent.effective_comm_dim();
      spec.u_range = agent.u_range;
      specs_.push_back(spec);
    }
    step_count_.assign(opts.batch, 0);
    reset();
  }

  std::size_t batch_size() const noexcept { return world_.batch_size(); }
  std::size_t n_agents() const noexcept { return policy_.size(); }
  /// World agent index of policy agent a.
  std::size_t agent_index(std::size_t a) const { return policy_.at(a); }
  const Agent<T>& agent(std::size_t a) const { return world_.agents()[policy_.at(a)]; }
  const ActionSpec<T>& action_spec(std::size_t a) const { return specs_.at(a); }
  std::size_t observation_dim(std::size_t a) const { return scenario_->observation_dim(world_, policy_.at(a)); }
  const std::optional<std::size_t>& max_steps() const noexcept { return opts_.max_steps; }
  const EnvOptions& options() const noexcept { return opts_; }

  World<T>& world() noexcept { return world_; }
  const World<T>& world() const noexcept { return world_; }
  Scenario<T>& scenario() noexcept { return *scenario_; }
  const std::vector<std::uint64_t>& step_count() const noexcept { return step_count_; }

  /// Resets one environment (others untouched) or all of them, and returns
  /// every agent's observation.
  std::vector<BatchVector<T>> reset(EnvSelection env = std::nullopt) {
    if (env) require(*env < batch_size(), "reset: env index " + std::to_string(*env) + " out of range");
    scenario_->reset_world_at(world_, env);
    for_selected(env, batch_size(), [&](std::size_t e) { step_count_[e] = 0; });
    return observe(env);
  }

  StepResult<T> step(std::span<const RawAction<T>> actions) {
    require(actions.size() == n_agents(), "step: expected " + std::to_string(n_agents()) + " actions, got " +
                                              std::to_string(actions.size()));
    std::vector<AgentAction<T>> decoded;
    decoded.reserve(actions.size());
    for (std::size_t a = 0; a < actions.size(); ++a) {
      decoded.push_back(decode_action(actions[a], specs_[a], world_.agents()[policy_[a]], world_.rng()));
    }
    world_.step(decoded);
    for (auto& c : step_count_) ++c;
    scenario_->post_step(world_);

    StepResult<T> r;
    r.rewards.reserve(n_agents());
    for (std::size_t a : policy_) r.rewards.push_back(scenario_->reward(world_, a));
    r.obs = observe(std::nullopt);
    r.dones = scenario_->done(world_);
    if (opts_.max_steps) {
      for (std::size_t e = 0; e < batch_size(); ++e) {
        if (step_count_[e] >= *opts_.max_steps) r.dones.set(e, true);
      }
    }
    r.infos.reserve(n_agents());
    for (std::size_t a : policy_) r.infos.push_back(scenario_->info(world_, a));
    return r;
  }

  /// Current observations; noise is drawn only for `noisy` environments.
  std::vector<BatchVector<T>> observe(EnvSelection noisy) {
    std::vector<BatchVector<T>> out;
    out.reserve(n_agents());
    for (std::size_t a : policy_) {
      BatchVector<T> obs = scenario_->observation(world_, a);
      const Agent<T>& agent = world_.agents()[a];
      if (agent.obs_noise_std > T(0)) {
        for_selected(noisy, batch_size(), [&](std::size_t e) {
          for (std::size_t k = 0; k < obs.dim(); ++k) obs(e, k) += agent.obs_noise_std * world_.rng().template normal<T>(e);
        });
      }
      out.push_back(std::move(obs));
    }
    return out;
  }

 private:
  static World<T> make(Scenario<T>& scenario, const EnvOptions& opts) {
    require(opts.batch >= 1, "env: batch size must be at least 1");
    return scenario.make_world(WorldOptions{opts.batch, opts.seed, opts.stream_offset});
  }

  std::unique_ptr<Scenario<T>> scenario_;
  EnvOptions opts_;
  World<T> world_;
  std::vector<std::size_t> policy_;
  std::vector<ActionSpec<T>> specs_;
  std::vector<std::uint64_t> step_count_;
};

/// Single-environment adapter with plain vectors in and out.
template <std::floating_point T>
class SingleEnv {
 public:
  struct Step {
    std::vector<std::vector<T>> obs;
    std::vector<T> rewards;
    bool done = false;
    std::vector<std::map<std::string, T>> infos;
  };

  SingleEnv(std::unique_ptr<Scenario<T>> scenario, std::uint64_t seed, std::optional<std::size_t> max_steps,
            ActionMode mode = ActionMode::continuous)
      : env_(std::move(scenario), EnvOptions{1, seed, max_steps, mode, 0}) {}

  Env<T>& vectorized() noexcept { return env_; }

  std::vector<std::vector<T>> reset() { return unwrap(env_.reset()); }

  /// Continuous actions, one vector per agent.
  Step step(const std::vector<std::vector<T>>& actions) {
    std::vector<RawAction<T>> raw;
    raw.reserve(actions.size());
    for (const auto& a : actions) {
      BatchVector<T> v(1, a.size());
      v.set_row(0, a);
      raw.push_back(RawAction<T>::continuous(std::move(v)));
    }
    StepResult<T> r = env_.step(raw);
    Step out;
    out.obs = unwrap(r.obs);
    for (const auto& rew : r.rewards) out.rewards.push_back(rew[0]);
    out.done = r.dones[0];
    for (const auto& info : r.infos) {
      std::map<std::string, T> m;
      for (const auto& [k, v] : info) m[k] = v[0];
      out.infos.push_back(std::move(m));
    }
    return out;
  }

 private:
  static std::vector<std::vector<T>> unwrap(const std::vector<BatchVector<T>>& obs) {
    std::vector<std::vector<T>> out;
    for (const auto& o : obs) out.push_back(o.row(0));
    return out;
  }

  Env<T> env_;
};

}  // namespace batchsim
