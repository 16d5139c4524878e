#pragma once

#include <cmath>
#include <vector>

#include "batchsim/batchsim.hpp"

namespace testutil {

using namespace batchsim;

/// Every state component of environment e, in entity order.
template <class T>
std::vector<T> env_slice(const World<T>& w, std::size_t e) {
  std::vector<T> out;
  for (std::size_t i = 0; i < w.n_entities(); ++i) {
    const auto& s = w.entity(i).state;
    out.insert(out.end(), {s.pos.x[e], s.pos.y[e], s.vel.x[e], s.vel.y[e], s.rot[e], s.ang_vel[e]});
  }
  return out;
}

template <class T>
bool world_finite(const World<T>& w) {
  for (std::size_t e = 0; e < w.batch_size(); ++e) {
    for (T v : env_slice(w, e)) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <class T>
bool all_finite_obs(const std::vector<BatchVector<T>>& obs) {
  for (const auto& o : obs) {
    for (T v : o.raw()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

/// Continuous zero actions for every policy agent.
template <class T>
std::vector<RawAction<T>> noop(const Env<T>& env) {
  std::vector<RawAction<T>> out;
  for (std::size_t a = 0; a < env.n_agents(); ++a) {
    out.push_back(RawAction<T>::continuous(BatchVector<T>(env.batch_size(), env.action_spec(a).continuous_dim())));
  }
  return out;
}

}  // namespace testutil
