#pragma once

#include <array>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "batchsim/batch.hpp"
#include "batchsim/rng.hpp"
#include "batchsim/shapes.hpp"

namespace batchsim {

template <std::floating_point T>
class World;

using Color = std::array<float, 3>;

namespace colors {
inline constexpr Color kBlue{0.25f, 0.25f, 0.75f};
inline constexpr Color kRed{0.75f, 0.25f, 0.25f};
inline constexpr Color kGreen{0.25f, 0.75f, 0.25f};
inline constexpr Color kBlack{0.15f, 0.15f, 0.15f};
inline constexpr Color kGray{0.5f, 0.5f, 0.5f};
inline constexpr Color kLightGreen{0.45f, 0.95f, 0.45f};
}  // namespace colors

template <std::floating_point T>
struct EntityState {
  BatchVec2<T> pos;
  BatchVec2<T> vel;
  BatchScalar<T> rot;
  BatchScalar<T> ang_vel;

  EntityState() = default;
  explicit EntityState(std::size_t batch) : pos(batch), vel(batch), rot(batch), ang_vel(batch) {}

  std::size_t batch() const noexcept { return rot.size(); }
  void resize(std::size_t batch) {
    pos.resize(batch);
    vel.resize(batch);
    rot.resize(batch);
    ang_vel.resize(batch);
  }

  /// Zeroes velocities for the selected environments.
  template <class Sel>
  void stop(Sel sel) {
    for_selected(sel, batch(), [&](std::size_t e) {
      vel.x[e] = 0;
      vel.y[e] = 0;
      ang_vel[e] = 0;
    });
  }

  bool operator==(const EntityState&) const = default;
};

/// Net force and torque accumulated on one entity for one step.
template <std::floating_point T>
struct Wrench {
  BatchVec2<T> force;
  BatchScalar<T> torque;

  Wrench() = default;
  explicit Wrench(std::size_t batch) : force(batch), torque(batch) {}
};

/// Ray-fan range sensor configuration. Rays are evenly spaced over
/// [start_angle, end_angle), in the agent frame when attach_rotation is set.
template <std::floating_point T>
struct Lidar {
  std::size_t n_rays = 12;
  T max_range = T(0.35);
  T start_angle = T(0);
  T end_angle = T(2 * std::numbers::pi);
  bool attach_rotation = true;
};

template <std::floating_point T>
class Entity {
 public:
  Entity(std::string name, Shape<T> shape, T mass = T(1)) : name(std::move(name)), shape(shape), mass(mass) {}
  virtual ~Entity() = default;

  std::string name;
  Shape<T> shape;
  T mass;
  std::optional<T> inertia_override;
  bool movable = true;
  bool rotatable = true;
  bool collidable = true;
  std::optional<T> max_speed;
  Color color = colors::kGray;
  EntityState<T> state;

  T moment_of_inertia() const { return inertia_override ? *inertia_override : batchsim::moment_of_inertia(shape, mass); }

  Pose<T> pose(std::size_t e) const { return {{state.pos.x[e], state.pos.y[e]}, state.rot[e]}; }
  Vec2<T> pos(std::size_t e) const { return {state.pos.x[e], state.pos.y[e]}; }
  Vec2<T> vel(std::size_t e) const { return {state.vel.x[e], state.vel.y[e]}; }
  void set_pos(std::size_t e, Vec2<T> p) {
    state.pos.x[e] = p.x;
    state.pos.y[e] = p.y;
  }
  void set_vel(std::size_t e, Vec2<T> v) {
    state.vel.x[e] = v.x;
    state.vel.y[e] = v.y;
  }

  void validate() const {
    validate_shape(shape);
    require(mass > T(0), "entity '" + name + "': mass must be positive");
    require(moment_of_inertia() > T(0), "entity '" + name + "': moment of inertia must be positive");
    if (max_speed) require(*max_speed > T(0), "entity '" + name + "': max_speed must be positive");
  }
};

template <std::floating_point T>
struct AgentAction {
  BatchVec2<T> force;  // N, already decoded
  BatchVector<T> comm;  // batch x comm_dim; dim 0 for silent agents

  AgentAction() = default;
  AgentAction(std::size_t batch, std::size_t comm_dim) : force(batch), comm(batch, comm_dim) {}
};

template <std::floating_point T>
class Agent : public Entity<T> {
 public:
  using Script = std::function<void(World<T>&, Agent<T>&)>;

  Agent(std::string name, Shape<T> shape, T mass = T(1)) : Entity<T>(std::move(name), shape, mass) {
    this->color = colors::kBlue;
  }

  T u_range = T(1);
  T u_multiplier = T(1);
  bool silent = true;
  std::size_t comm_dim = 0;
  T action_noise_std = T(0);
  T obs_noise_std = T(0);
  std::vector<Lidar<T>> sensors;
  /// When set, the agent is driven by the scenario instead of the caller.
  Script action_script;

  AgentAction<T> action;

  std::size_t effective_comm_dim() const noexcept { return silent ? 0 : comm_dim; }
  bool scripted() const noexcept { return static_cast<bool>(action_script); }
  T max_force() const noexcept { return u_range * u_multiplier; }

  void validate() const {
    Entity<T>::validate();
    require(u_range > T(0), "agent '" + this->name + "': u_range must be positive");
    require(u_multiplier > T(0), "agent '" + this->name + "': u_multiplier must be positive");
    require(action_noise_std >= T(0) && obs_noise_std >= T(0), "agent '" + this->name + "': noise std must be >= 0");
    for (const auto& l : sensors) {
      require(l.n_rays >= 1, "lidar needs at least one ray");
      require(l.max_range > T(0), "lidar max_range must be positive");
    }
  }
};

}  // namespace batchsim
