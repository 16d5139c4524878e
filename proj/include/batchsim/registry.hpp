#pragma once

// Name -> scenario lookup for the bundled tasks.

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "batchsim/scenarios/balance.hpp"
#include "batchsim/scenarios/discovery.hpp"
#include "batchsim/scenarios/dispersion.hpp"
#include "batchsim/scenarios/dropout.hpp"
#include "batchsim/scenarios/flocking.hpp"
#include "batchsim/scenarios/football.hpp"
#include "batchsim/scenarios/give_way.hpp"
#include "batchsim/scenarios/passage.hpp"
#include "batchsim/scenarios/reverse_transport.hpp"
#include "batchsim/scenarios/simple_spread.hpp"
#include "batchsim/scenarios/transport.hpp"
#include "batchsim/scenarios/waterfall.hpp"
#include "batchsim/scenarios/wheel.hpp"

namespace batchsim {

/// Unknown scenario name.
class RegistryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline constexpr std::array<std::string_view, 13> kScenarioNames = {
    "transport", "wheel",    "balance",   "give_way",  "football",  "passage",      "reverse_transport",
    "dispersion", "dropout", "flocking", "discovery", "waterfall", "simple_spread"};

inline std::span<const std::string_view> scenario_names() { return kScenarioNames; }

inline bool is_scenario(std::string_view name) {
  return std::find(kScenarioNames.begin(), kScenarioNames.end(), name) != kScenarioNames.end();
}

namespace detail {

/// Calls f.template operator()<S>() for the scenario class registered as `name`.
template <std::floating_point T, class F>
decltype(auto) dispatch_scenario(std::string_view name, F&& f) {
  using namespace scenarios;
  if (name == "transport") return f.template operator()<Transport<T>>();
  if (name == "wheel") return f.template operator()<Wheel<T>>();
  if (name == "balance") return f.template operator()<Balance<T>>();
  if (name == "give_way") return f.template operator()<GiveWay<T>>();
  if (name == "football") return f.template operator()<Football<T>>();
  if (name == "passage") return f.template operator()<Passage<T>>();
  if (name == "reverse_transport") return f.template operator()<ReverseTransport<T>>();
  if (name == "dispersion") return f.template operator()<Dispersion<T>>();
  if (name == "dropout") return f.template operator()<Dropout<T>>();
  if (name == "flocking") return f.template operator()<Flocking<T>>();
  if (name == "discovery") return f.template operator()<Discovery<T>>();
  if (name == "waterfall") return f.template operator()<Waterfall<T>>();
  if (name == "simple_spread") return f.template operator()<SimpleSpread<T>>();
  throw RegistryError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace detail

/// Builds a scenario, rejecting overrides it does not understand.
template <std::floating_point T = float>
std::unique_ptr<Scenario<T>> create_scenario(std::string_view name, const ScenarioConfig& cfg = {}) {
  auto s = detail::dispatch_scenario<T>(name, [&]<class S>() -> std::unique_ptr<Scenario<T>> { return std::make_unique<S>(cfg); });
  cfg.check_all_consumed(name);
  return s;
}

template <std::floating_point T = float>
HeuristicPolicy<T> heuristic_policy(std::string_view name, const ScenarioConfig& cfg = {}) {
  return detail::dispatch_scenario<T>(name, [&]<class S>() { return S::heuristic(cfg); });
}

/// Env with the scenario's own horizon unless one is given.
template <std::floating_point T = float>
Env<T> make_env(std::string_view name, const ScenarioConfig& cfg, EnvOptions opts) {
  auto scenario = create_scenario<T>(name, cfg);
  if (!opts.max_steps) opts.max_steps = scenario->default_max_steps();
  return Env<T>(std::move(scenario), opts);
}

}  // namespace batchsim
