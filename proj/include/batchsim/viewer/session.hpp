#pragma once

// Viewer-side simulation state: the env, who is under human control, which env
// is shown, and the control-message handler. All public calls lock, so the
// network threads and the step loop can share one session.

#include <mutex>
#include <optional>
#include <string>

#include "batchsim/registry.hpp"
#include "batchsim/rollout.hpp"
#include "batchsim/viewer/frame.hpp"

namespace batchsim::viewer {

template <std::floating_point T = float>
class ViewerSession {
 public:
  ViewerSession(std::string_view scenario, const ScenarioConfig& cfg, std::size_t batch, std::uint64_t seed)
      : env_(create_scenario<T>(scenario, cfg), EnvOptions{.batch = batch, .seed = seed}),
        policy_(heuristic_policy<T>(scenario, cfg)),
        last_rewards_(env_.n_agents(), BatchScalar<T>(batch, T(0))),
        last_done_(batch, false) {
    horizon_ = create_scenario<T>(scenario, cfg)->default_max_steps();
    obs_ = env_.reset();
  }

  /// One simulation step unless paused. A requested reset replaces the step,
  /// so the frame that follows shows t = 0. Finished envs restart individually.
  void tick() {
    std::lock_guard lock(mu_);
    if (reset_pending_) {
      obs_ = env_.reset();
      last_rewards_.assign(env_.n_agents(), BatchScalar<T>(env_.batch_size(), T(0)));
      last_done_ = BatchMask(env_.batch_size(), false);
      t_ = 0;
      reset_pending_ = false;
      return;
    }
    if (paused_) return;
    std::vector<RawAction<T>> actions = policy_actions(env_, obs_, policy_);
    if (controlled_) {
      const T u = env_.action_spec(*controlled_).u_range;
      actions[*controlled_].values(env_index_, 0) = force_[0] * u;
      actions[*controlled_].values(env_index_, 1) = force_[1] * u;
    }
    StepResult<T> r = env_.step(actions);
    last_rewards_ = std::move(r.rewards);
    last_done_ = r.dones;
    obs_ = std::move(r.obs);
    for (std::size_t e = 0; e < env_.batch_size(); ++e) {
      if (r.dones[e] || env_.step_count()[e] >= horizon_) {
        auto fresh = env_.reset(e);
        for (std::size_t a = 0; a < obs_.size(); ++a) {
          for (std::size_t k = 0; k < obs_[a].dim(); ++k) obs_[a](e, k) = fresh[a](e, k);
        }
      }
    }
    ++t_;
  }

  FrameSnapshot snapshot() const {
    std::lock_guard lock(mu_);
    FrameSnapshot s = snapshot_of(env_.world(), env_index_, t_);
    for (std::size_t a = 0; a < env_.n_agents(); ++a) {
      s.hud["reward_" + env_.agent(a).name] = static_cast<double>(last_rewards_[a][env_index_]);
    }
    s.hud["done"] = last_done_[env_index_] ? 1.0 : 0.0;
    s.hud["selected_agent"] = controlled_ ? static_cast<double>(*controlled_) : -1.0;
    s.hud["paused"] = paused_ ? 1.0 : 0.0;
    return s;
  }

  /// Applies one control message and returns the JSON reply. Invalid
  /// messages leave the state untouched.
  std::string handle_control(const std::string& text) {
    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::exception&) {
      return error("malformed JSON");
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) return error("missing message type");
    const std::string type = msg["type"].get<std::string>();
    std::lock_guard lock(mu_);
    if (type == "control") {
      const auto agent = agent_field(msg);
      if (!agent) return error("unknown agent");
      if (!msg.contains("force") || !msg["force"].is_array() || msg["force"].size() != 2 || !msg["force"][0].is_number() ||
          !msg["force"][1].is_number()) {
        return error("force must be [fx, fy]");
      }
      const double fx = msg["force"][0].get<double>();
      const double fy = msg["force"][1].get<double>();
      if (!std::isfinite(fx) || !std::isfinite(fy)) return error("force must be finite");
      controlled_ = *agent;
      force_ = {static_cast<T>(std::clamp(fx, -1.0, 1.0)), static_cast<T>(std::clamp(fy, -1.0, 1.0))};
    } else if (type == "select_agent") {
      const auto agent = agent_field(msg);
      if (!agent) return error("unknown agent");
      controlled_ = *agent;
      force_ = {T(0), T(0)};
    } else if (type == "select_env") {
      if (!msg.contains("env") || !msg["env"].is_number_integer()) return error("env must be an integer");
      const auto e = msg["env"].get<long long>();
      if (e < 0 || static_cast<std::size_t>(e) >= env_.batch_size()) return error("env index out of range");
      env_index_ = static_cast<std::size_t>(e);
    } else if (type == "reset") {
      reset_pending_ = true;
    } else if (type == "pause") {
      paused_ = true;
    } else if (type == "resume") {
      paused_ = false;
    } else {
      return error("unknown message type '" + type + "'");
    }
    return json{{"type", "ack"}}.dump();
  }

  std::uint64_t t() const {
    std::lock_guard lock(mu_);
    return t_;
  }

  std::size_t batch_size() const { return env_.batch_size(); }

 private:
  static std::string error(const std::string& reason) { return json{{"type", "error"}, {"reason", reason}}.dump(); }

  /// Policy-agent index named by msg["agent"].
  std::optional<std::size_t> agent_field(const json& msg) const {
    if (!msg.contains("agent") || !msg["agent"].is_string()) return std::nullopt;
    const std::string name = msg["agent"].get<std::string>();
    for (std::size_t a = 0; a < env_.n_agents(); ++a) {
      if (env_.agent(a).name == name) return a;
    }
    return std::nullopt;
  }

  mutable std::mutex mu_;
  Env<T> env_;
  HeuristicPolicy<T> policy_;
  std::size_t horizon_ = 200;
  std::vector<BatchVector<T>> obs_;
  std::vector<BatchScalar<T>> last_rewards_;
  BatchMask last_done_;
  std::uint64_t t_ = 0;
  std::size_t env_index_ = 0;
  std::optional<std::size_t> controlled_;
  std::array<T, 2> force_{};
  bool paused_ = false;
  bool reset_pending_ = false;
};

}  // namespace batchsim::viewer
