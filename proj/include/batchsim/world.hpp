#pragma once

// Batched 2D world and its force-based step.
//
// Per environment, every entity i accumulates
//   f_i = f_action_i + m_i g + sum_j f_contact_ij
// and the state is advanced with semi-implicit Euler:
//   v' = (1 - damping) v + f / m dt,   x' = x + v' dt
// with the same recurrence on (rot, ang_vel) driven by contact torques.

#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "batchsim/batch.hpp"
#include "batchsim/entity.hpp"
#include "batchsim/parallel.hpp"
#include "batchsim/rng.hpp"
#include "batchsim/shapes.hpp"

namespace batchsim {

template <std::floating_point T>
struct PhysParams {
  T dt = T(0.1);
  T damping = T(0.25);
  Vec2<T> gravity{T(0), T(0)};
  T contact_force = T(100);
  T contact_margin = T(1e-3);

  void validate() const {
    require(dt > T(0), "dt must be positive");
    require(damping >= T(0) && damping < T(1), "damping must lie in [0, 1)");
    require(contact_force >= T(0), "contact_force must be non-negative");
    require(contact_margin > T(0), "contact_margin must be positive");
  }
};

/// Distances below this count as exact overlap and use the fallback direction.
template <std::floating_point T>
inline constexpr T kOverlapEpsilon = T(1e-8);

/// Direction used when two closest points coincide: +x for even i, +y for odd i.
template <std::floating_point T>
constexpr Vec2<T> overlap_direction(std::size_t i) noexcept {
  return (i % 2 == 0) ? Vec2<T>{T(1), T(0)} : Vec2<T>{T(0), T(1)};
}

/// softplus(z) = log(1 + exp(z)), without overflow for large z.
template <std::floating_point T>
inline T softplus(T z) noexcept {
  return z > T(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// Contact force acting on j (the force on i is its negation).
///
/// x_ij = p_j - p_i. Zero when |x_ij| > d_min, otherwise
/// c * x_ij/|x_ij| * k * log(1 + exp(-(|x_ij| - d_min) / k)).
template <std::floating_point T>
inline Vec2<T> contact_force_on_j(Vec2<T> x_ij, T d_min, T c, T k, Vec2<T> fallback) noexcept {
  const T dist = norm(x_ij);
  if (dist > d_min) return {};
  const Vec2<T> dir = dist < kOverlapEpsilon<T> ? fallback : x_ij * (T(1) / dist);
  const T magnitude = c * k * softplus(-(dist - d_min) / k);
  return dir * magnitude;
}

/// Batched closest points of two shapes.
template <std::floating_point T>
struct ContactGeometry {
  BatchVec2<T> p_i;
  BatchVec2<T> p_j;
  BatchScalar<T> d_min;
};

template <std::floating_point T>
struct ContactResult {
  BatchMask active;
  BatchVec2<T> f_e;  // along x_ij, i.e. the force applied to j
  BatchVec2<T> force_on_i;
  BatchVec2<T> force_on_j;
  BatchVec2<T> x_ij;
  BatchScalar<T> d_min;
  BatchVec2<T> p_i;
  BatchVec2<T> p_j;
};

template <std::floating_point T>
ContactGeometry<T> closest_points(const BatchVec2<T>& pos_i, const BatchScalar<T>& rot_i, const Shape<T>& shape_i,
                                  const BatchVec2<T>& pos_j, const BatchScalar<T>& rot_j, const Shape<T>& shape_j) {
  const std::size_t batch = pos_i.size();
  require(rot_i.size() == batch && pos_j.size() == batch && rot_j.size() == batch, "closest_points: length mismatch");
  ContactGeometry<T> out{BatchVec2<T>(batch), BatchVec2<T>(batch), BatchScalar<T>(batch)};
  for (std::size_t e = 0; e < batch; ++e) {
    const auto cp = contact_points(shape_i, Pose<T>{{pos_i.x[e], pos_i.y[e]}, rot_i[e]}, shape_j,
                                   Pose<T>{{pos_j.x[e], pos_j.y[e]}, rot_j[e]});
    out.p_i.x[e] = cp.p_i.x;
    out.p_i.y[e] = cp.p_i.y;
    out.p_j.x[e] = cp.p_j.x;
    out.p_j.y[e] = cp.p_j.y;
    out.d_min[e] = cp.d_min;
  }
  return out;
}

template <std::floating_point T>
ContactResult<T> collision_force(const ContactGeometry<T>& g, const PhysParams<T>& params,
                                 Vec2<T> fallback = overlap_direction<T>(0)) {
  const std::size_t batch = g.p_i.size();
  ContactResult<T> r{BatchMask(batch),       BatchVec2<T>(batch), BatchVec2<T>(batch), BatchVec2<T>(batch),
                     BatchVec2<T>(batch),    g.d_min,             g.p_i,               g.p_j};
  for (std::size_t e = 0; e < batch; ++e) {
    const Vec2<T> x = {g.p_j.x[e] - g.p_i.x[e], g.p_j.y[e] - g.p_i.y[e]};
    const Vec2<T> f = contact_force_on_j(x, g.d_min[e], params.contact_force, params.contact_margin, fallback);
    r.active.set(e, norm(x) <= g.d_min[e]);
    r.x_ij.x[e] = x.x;
    r.x_ij.y[e] = x.y;
    r.f_e.x[e] = f.x;
    r.f_e.y[e] = f.y;
    r.force_on_j.x[e] = f.x;
    r.force_on_j.y[e] = f.y;
    r.force_on_i.x[e] = -f.x;
    r.force_on_i.y[e] = -f.y;
  }
  return r;
}

namespace detail {

/// Semi-implicit Euler on environments [begin, end).
template <std::floating_point T>
void integrate_range(const Entity<T>& ent, EntityState<T>& s, const T* fx, const T* fy, const T* torque,
                     const PhysParams<T>& p, std::size_t begin, std::size_t end) {
  const T keep = T(1) - p.damping;
  if (ent.movable) {
    const T inv_m_dt = p.dt / ent.mass;
    T* vx = s.vel.x.data();
    T* vy = s.vel.y.data();
    T* px = s.pos.x.data();
    T* py = s.pos.y.data();
    if (ent.max_speed) {
      const T vmax = *ent.max_speed;
      for (std::size_t e = begin; e < end; ++e) {
        T nvx = keep * vx[e] + fx[e] * inv_m_dt;
        T nvy = keep * vy[e] + fy[e] * inv_m_dt;
        clamp_norm_inplace(nvx, nvy, vmax);
        vx[e] = nvx;
        vy[e] = nvy;
        px[e] += nvx * p.dt;
        py[e] += nvy * p.dt;
      }
    } else {
      for (std::size_t e = begin; e < end; ++e) {
        vx[e] = keep * vx[e] + fx[e] * inv_m_dt;
        vy[e] = keep * vy[e] + fy[e] * inv_m_dt;
        px[e] += vx[e] * p.dt;
        py[e] += vy[e] * p.dt;
      }
    }
  }
  if (ent.rotatable) {
    const T inv_i_dt = p.dt / ent.moment_of_inertia();
    T* w = s.ang_vel.data();
    T* th = s.rot.data();
    for (std::size_t e = begin; e < end; ++e) {
      w[e] = keep * w[e] + torque[e] * inv_i_dt;
      th[e] += w[e] * p.dt;
    }
  }
}

}  // namespace detail

/// One integration step for a single entity given its accumulated wrench.
template <std::floating_point T>
EntityState<T> integrate(const Entity<T>& entity, const Wrench<T>& wrench, const PhysParams<T>& params) {
  EntityState<T> next = entity.state;
  const std::size_t batch = next.batch();
  require(wrench.force.size() == batch && wrench.torque.size() == batch, "integrate: wrench batch mismatch");
  detail::integrate_range(entity, next, wrench.force.x.data(), wrench.force.y.data(), wrench.torque.data(), params,
                          0, batch);
  return next;
}

template <std::floating_point T>
class World {
 public:
  using CollisionFilter = std::function<bool(const Entity<T>&, const Entity<T>&)>;

  explicit World(std::size_t batch, PhysParams<T> params = {}, std::uint64_t seed = 0, std::size_t stream_offset = 0)
      : batch_(batch), params_(params), rng_(seed, batch, stream_offset) {
    require(batch >= 1, "World: batch size must be at least 1");
    params_.validate();
  }

  std::size_t batch_size() const noexcept { return batch_; }
  const PhysParams<T>& params() const noexcept { return params_; }
  PhysParams<T>& params() noexcept { return params_; }
  SeededRng& rng() noexcept { return rng_; }

  /// References stay valid as more entities are added.
  Agent<T>& add_agent(Agent<T> agent) {
    prepare(agent);
    agent.validate();
    agent.action = AgentAction<T>(batch_, agent.effective_comm_dim());
    agents_.push_back(std::move(agent));
    return agents_.back();
  }

  Entity<T>& add_landmark(Entity<T> landmark) {
    prepare(landmark);
    landmark.validate();
    landmarks_.push_back(std::move(landmark));
    return landmarks_.back();
  }

  std::deque<Agent<T>>& agents() noexcept { return agents_; }
  const std::deque<Agent<T>>& agents() const noexcept { return agents_; }
  std::deque<Entity<T>>& landmarks() noexcept { return landmarks_; }
  const std::deque<Entity<T>>& landmarks() const noexcept { return landmarks_; }

  /// Agents first, then landmarks.
  std::size_t n_entities() const noexcept { return agents_.size() + landmarks_.size(); }
  Entity<T>& entity(std::size_t i) {
    return i < agents_.size() ? static_cast<Entity<T>&>(agents_[i]) : landmarks_[i - agents_.size()];
  }
  const Entity<T>& entity(std::size_t i) const {
    return i < agents_.size() ? static_cast<const Entity<T>&>(agents_[i]) : landmarks_[i - agents_.size()];
  }

  Entity<T>* find(std::string_view name) {
    for (std::size_t i = 0; i < n_entities(); ++i) {
      if (entity(i).name == name) return &entity(i);
    }
    return nullptr;
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < n_entities(); ++i) {
      if (entity(i).name == name) return i;
    }
    return std::nullopt;
  }

  /// Agents not driven by an action script, in world order.
  std::vector<std::size_t> policy_agents() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (!agents_[i].scripted()) out.push_back(i);
    }
    return out;
  }

  /// Restricts which collidable pairs interact; both entities must pass.
  void set_collision_filter(CollisionFilter filter) { filter_ = std::move(filter); }

  bool interacts(std::size_t i, std::size_t j) const {
    const Entity<T>& a = entity(i);
    const Entity<T>& b = entity(j);
    if (!a.collidable || !b.collidable) return false;
    if (!(a.movable || a.rotatable || b.movable || b.rotatable)) return false;
    return !filter_ || filter_(a, b);
  }

  /// Force and torque accumulated on entity i during the last step.
  Wrench<T> last_wrench(std::size_t i) const {
    Wrench<T> w(batch_);
    if (scratch_fx_.size() != n_entities() * batch_) return w;
    for (std::size_t e = 0; e < batch_; ++e) {
      w.force.x[e] = scratch_fx_[i * batch_ + e];
      w.force.y[e] = scratch_fy_[i * batch_ + e];
      w.torque[e] = scratch_tq_[i * batch_ + e];
    }
    return w;
  }

  /// Advances every environment by one dt. `actions` holds one decoded action
  /// per policy agent, in policy_agents() order.
  void step(std::span<const AgentAction<T>> actions);

 private:
  void prepare(Entity<T>& ent) {
    for (std::size_t i = 0; i < n_entities(); ++i) {
      require(entity(i).name != ent.name, "World: duplicate entity name '" + ent.name + "'");
    }
    if (ent.state.batch() != batch_) ent.state = EntityState<T>(batch_);
  }

  void accumulate_range(std::size_t begin, std::size_t end);

  std::size_t batch_;
  PhysParams<T> params_;
  SeededRng rng_;
  std::deque<Agent<T>> agents_;
  std::deque<Entity<T>> landmarks_;
  CollisionFilter filter_;

  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<T> scratch_fx_;
  std::vector<T> scratch_fy_;
  std::vector<T> scratch_tq_;
};

template <std::floating_point T>
void World<T>::step(std::span<const AgentAction<T>> actions) {
  const auto policy = policy_agents();
  require(actions.size() == policy.size(), "world step: expected " + std::to_string(policy.size()) +
                                               " actions, got " + std::to_string(actions.size()));
  for (std::size_t a = 0; a < policy.size(); ++a) {
    const AgentAction<T>& act = actions[a];
    Agent<T>& agent = agents_[policy[a]];
    require(act.force.size() == batch_, "world step: action batch size mismatch for '" + agent.name + "'");
    require(all_finite(act.force) && all_finite(act.comm),
            "world step: non-finite action for agent '" + agent.name + "'");
    agent.action.force = act.force;
    if (agent.effective_comm_dim() > 0) {
      require(act.comm.dim() == agent.effective_comm_dim() && act.comm.batch() == batch_,
              "world step: communication shape mismatch for '" + agent.name + "'");
      agent.action.comm = act.comm;
    }
  }
  for (auto& agent : agents_) {
    if (agent.scripted()) agent.action_script(*this, agent);
  }

  const std::size_t n = n_entities();
  pairs_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (interacts(i, j)) pairs_.emplace_back(i, j);
    }
  }
  scratch_fx_.assign(n * batch_, T(0));
  scratch_fy_.assign(n * batch_, T(0));
  scratch_tq_.assign(n * batch_, T(0));

  parallel_chunks(batch_, [this](std::size_t begin, std::size_t end) {
    accumulate_range(begin, end);
    for (std::size_t i = 0; i < n_entities(); ++i) {
      Entity<T>& ent = entity(i);
      detail::integrate_range(ent, ent.state, scratch_fx_.data() + i * batch_, scratch_fy_.data() + i * batch_,
                              scratch_tq_.data() + i * batch_, params_, begin, end);
    }
  });
}

template <std::floating_point T>
void World<T>::accumulate_range(std::size_t begin, std::size_t end) {
  const std::size_t B = batch_;
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const Agent<T>& agent = agents_[a];
    T* fx = scratch_fx_.data() + a * B;
    T* fy = scratch_fy_.data() + a * B;
    const T* ax = agent.action.force.x.data();
    const T* ay = agent.action.force.y.data();
    for (std::size_t e = begin; e < end; ++e) {
      fx[e] += ax[e];
      fy[e] += ay[e];
    }
  }
  if (params_.gravity.x != T(0) || params_.gravity.y != T(0)) {
    for (std::size_t i = 0; i < n_entities(); ++i) {
      const T gx = entity(i).mass * params_.gravity.x;
      const T gy = entity(i).mass * params_.gravity.y;
      T* fx = scratch_fx_.data() + i * B;
      T* fy = scratch_fy_.data() + i * B;
      for (std::size_t e = begin; e < end; ++e) {
        fx[e] += gx;
        fy[e] += gy;
      }
    }
  }

  const T c = params_.contact_force;
  const T k = params_.contact_margin;
  for (const auto& [i, j] : pairs_) {
    const Entity<T>& ei = entity(i);
    const Entity<T>& ej = entity(j);
    const Vec2<T> fallback = overlap_direction<T>(i);
    T* fxi = scratch_fx_.data() + i * B;
    T* fyi = scratch_fy_.data() + i * B;
    T* tqi = scratch_tq_.data() + i * B;
    T* fxj = scratch_fx_.data() + j * B;
    T* fyj = scratch_fy_.data() + j * B;
    T* tqj = scratch_tq_.data() + j * B;
    std::visit(
        [&](const auto& si, const auto& sj) {
          using SI = std::decay_t<decltype(si)>;
          using SJ = std::decay_t<decltype(sj)>;
          constexpr bool kSpheres = std::is_same_v<SI, Sphere<T>> && std::is_same_v<SJ, Sphere<T>>;
          const T* xi = ei.state.pos.x.data();
          const T* yi = ei.state.pos.y.data();
          const T* xj = ej.state.pos.x.data();
          const T* yj = ej.state.pos.y.data();
          if constexpr (kSpheres) {
            const T d_min = si.radius + sj.radius;
            for (std::size_t e = begin; e < end; ++e) {
              const Vec2<T> f = contact_force_on_j(Vec2<T>{xj[e] - xi[e], yj[e] - yi[e]}, d_min, c, k, fallback);
              fxj[e] += f.x;
              fyj[e] += f.y;
              fxi[e] -= f.x;
              fyi[e] -= f.y;
            }
          } else {
            const T* ri = ei.state.rot.data();
            const T* rj = ej.state.rot.data();
            for (std::size_t e = begin; e < end; ++e) {
              const Pose<T> pi{{xi[e], yi[e]}, ri[e]};
              const Pose<T> pj{{xj[e], yj[e]}, rj[e]};
              const ContactPoints<T> cp = contact_points_of(si, pi, sj, pj);
              const Vec2<T> f = contact_force_on_j(cp.p_j - cp.p_i, cp.d_min, c, k, fallback);
              if (f.x == T(0) && f.y == T(0)) continue;
              fxj[e] += f.x;
              fyj[e] += f.y;
              fxi[e] -= f.x;
              fyi[e] -= f.y;
              tqi[e] += cross(cp.p_i - pi.pos, -f);
              tqj[e] += cross(cp.p_j - pj.pos, f);
            }
          }
        },
        ei.shape, ej.shape);
  }
}

/// Free-function form of World::step.
template <std::floating_point T>
void world_step(World<T>& world, std::span<const AgentAction<T>> actions) {
  world.step(actions);
}

}  // namespace batchsim
