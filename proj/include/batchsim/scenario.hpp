#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "batchsim/world.hpp"

namespace batchsim {

/// key=value scenario overrides with typed lookup. Every override must be
/// consumed by the scenario that receives it; leftovers are rejected.
class ScenarioConfig {
 public:
  ScenarioConfig() = default;
  ScenarioConfig(std::initializer_list<std::pair<const std::string, std::string>> init) : values_(init) {}

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

  /// Parses "key=value".
  void set_assignment(std::string_view kv) {
    const auto eq = kv.find('=');
    require(eq != std::string_view::npos && eq > 0, "config override must look like key=value: '" + std::string(kv) + "'");
    set(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  long long get_int(const std::string& key, long long fallback) const {
    const auto v = lookup(key);
    if (!v) return fallback;
    long long out = 0;
    const auto* end = v->data() + v->size();
    const auto [ptr, ec] = std::from_chars(v->data(), end, out);
    require(ec == std::errc{} && ptr == end, "config '" + key + "': expected an integer, got '" + *v + "'");
    return out;
  }

  double get_real(const std::string& key, double fallback) const {
    const auto v = lookup(key);
    if (!v) return fallback;
    std::size_t used = 0;
    double out = 0;
    try {
      out = std::stod(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == v->size() && !v->empty(), "config '" + key + "': expected a number, got '" + *v + "'");
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto v = lookup(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ContractViolation("config '" + key + "': expected true/false, got '" + *v + "'");
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto v = lookup(key);
    return v ? *v : fallback;
  }

  /// Throws for any override no getter asked about.
  void check_all_consumed(std::string_view scenario) const {
    for (const auto& [k, v] : values_) {
      require(consumed_.count(k) != 0, "scenario '" + std::string(scenario) + "' has no parameter '" + k + "'");
    }
  }

 private:
  std::optional<std::string> lookup(const std::string& key) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

struct WorldOptions {
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  /// Global index of local environment 0 for the random streams.
  std::size_t stream_offset = 0;
};

template <std::floating_point T>
using InfoMap = std::map<std::string, BatchScalar<T>>;

/// A task definition. Agent indices refer to World::agents().
template <std::floating_point T>
class Scenario {
 public:
  virtual ~Scenario() = default;

  virtual std::string_view name() const = 0;

  /// Builds agents and landmarks for `opts.batch` environments.
  virtual World<T> make_world(const WorldOptions& opts) = 0;

  /// Re-spawns the selected environment, or all of them.
  virtual void reset_world_at(World<T>& world, EnvSelection env) = 0;

  /// Runs once per step after physics and before any reward/observation call.
  virtual void post_step(World<T>& /*world*/) {}

  virtual BatchScalar<T> reward(World<T>& world, std::size_t agent) = 0;

  virtual std::size_t observation_dim(const World<T>& world, std::size_t agent) const = 0;
  virtual BatchVector<T> observation(const World<T>& world, std::size_t agent) = 0;

  virtual BatchMask done(const World<T>& world) { return BatchMask(world.batch_size(), false); }
  virtual InfoMap<T> info(const World<T>& /*world*/, std::size_t /*agent*/) { return {}; }

  /// Episode horizon used when the caller does not pick one.
  virtual std::size_t default_max_steps() const { return 200; }
};

}  // namespace batchsim
