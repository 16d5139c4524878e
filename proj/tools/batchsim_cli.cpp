// batchsim command line: bench, run, serve, list-scenarios.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "batchsim/batchsim.hpp"
#include "batchsim/viewer/frame.hpp"
#ifdef BATCHSIM_HAVE_VIEWER
#include "batchsim/viewer/server.hpp"
#endif

namespace {

using namespace batchsim;

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 1;

/// Bad user input that should exit with the usage code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v == 0) throw UsageError("--envs: expected positive integers, got '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("--envs: empty list");
  if (!std::is_sorted(out.begin(), out.end())) throw UsageError("--envs: counts must be ascending");
  return out;
}

void check_scenario(const std::string& name) {
  if (!is_scenario(name)) throw UsageError("unknown scenario '" + name + "' (see list-scenarios)");
}

ScenarioConfig parse_overrides(const std::vector<std::string>& sets) {
  ScenarioConfig cfg;
  try {
    for (const auto& kv : sets) cfg.set_assignment(kv);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

/// Scenario construction errors caused by --set are usage errors too.
std::unique_ptr<Scenario<float>> build_scenario(const std::string& name, const ScenarioConfig& cfg) {
  try {
    return create_scenario<float>(name, cfg);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
}

void apply_threads(int threads) {
  set_num_threads(threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

struct BenchArgs {
  std::string scenario = "simple_spread";
  std::string envs = "1,1000,10000";
  std::size_t steps = 100;
  std::string mode = "both";
  std::string out = "bench.csv";
  int threads = 0;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a) {
  check_scenario(a.scenario);
  const auto counts = parse_counts(a.envs);
  apply_threads(a.threads);
  std::vector<BenchRow> rows;
  for (BenchMode m : {BenchMode::vectorized, BenchMode::sequential}) {
    if (a.mode != "both" && a.mode != to_string(m)) continue;
    for (const BenchRow& r : bench_throughput<float>(a.scenario, counts, a.steps, m, a.seed)) {
      std::cerr << to_string(r.mode) << " n_envs=" << r.n_envs << ' '
                << (r.seconds ? std::to_string(*r.seconds) + " s" : std::string("failed")) << '\n';
      rows.push_back(r);
    }
  }
  std::ofstream f(a.out);
  if (!f) throw std::runtime_error("cannot open '" + a.out + "' for writing");
  f << std::setprecision(9);
  write_bench_csv(f, rows);
  return 0;
}

struct RunArgs {
  std::string scenario;
  std::string policy = "heuristic";
  std::size_t envs = 1;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  std::string dump_frames;
  int threads = 1;
};

int cmd_run(const RunArgs& a) {
  check_scenario(a.scenario);
  if (a.envs == 0) throw UsageError("--envs must be >= 1");
  const ScenarioConfig cfg = parse_overrides(a.sets);
  auto scenario = build_scenario(a.scenario, cfg);
  const std::size_t horizon = a.steps > 0 ? a.steps : scenario->default_max_steps();
  apply_threads(a.threads);
  Env<float> env(std::move(scenario), EnvOptions{.batch = a.envs, .seed = a.seed, .max_steps = horizon});
  const HeuristicPolicy<float> heuristic = heuristic_policy<float>(a.scenario, cfg);
  RandomPolicy<float> random(a.seed, a.envs);

  if (!a.dump_frames.empty()) std::filesystem::create_directories(a.dump_frames);
  auto dump = [&](std::uint64_t t) {
    if (a.dump_frames.empty()) return;
    std::ostringstream name;
    name << "frame_" << std::setw(6) << std::setfill('0') << t << ".json";
    std::ofstream f(std::filesystem::path(a.dump_frames) / name.str());
    if (!f) throw std::runtime_error("cannot write frame file in '" + a.dump_frames + "'");
    f << viewer::encode_frame(viewer::snapshot_of(env.world(), 0, t)) << '\n';
  };

  std::vector<BatchVector<float>> obs = env.reset();
  dump(0);
  std::vector<double> ret(a.envs, 0.0);
  std::vector<std::uint8_t> done(a.envs, 0);
  std::size_t t = 0;
  while (t < horizon) {
    auto actions = a.policy == "heuristic" ? policy_actions(env, obs, heuristic) : random(env);
    StepResult<float> r = env.step(actions);
    ++t;
    dump(t);
    bool all = true;
    for (std::size_t e = 0; e < a.envs; ++e) {
      if (done[e]) continue;
      double mean = 0;
      for (const auto& rew : r.rewards) mean += rew[e];
      ret[e] += r.rewards.empty() ? 0.0 : mean / static_cast<double>(r.rewards.size());
      if (r.dones[e]) done[e] = 1;
      all = all && done[e];
    }
    obs = std::move(r.obs);
    if (all) break;
  }
  double mean = 0;
  for (double v : ret) mean += v;
  mean /= static_cast<double>(a.envs);
  std::cout << "scenario=" << a.scenario << " policy=" << a.policy << " envs=" << a.envs << " steps=" << t
            << " mean_return=" << mean << '\n';
  return 0;
}

struct ServeArgs {
  std::string scenario = "simple_spread";
  std::size_t envs = 1;
  std::string host = "127.0.0.1";
  int port = 8765;
  double tick_rate = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  std::uint64_t ticks = 0;
};

#ifdef BATCHSIM_HAVE_VIEWER
std::atomic<viewer::ViewerServer<float>*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}
#endif

int cmd_serve(const ServeArgs& a) {
#ifdef BATCHSIM_HAVE_VIEWER
  check_scenario(a.scenario);
  if (a.envs == 0) throw UsageError("--envs must be >= 1");
  if (a.port < 0 || a.port > 65535) throw UsageError("--port out of range");
  const ScenarioConfig cfg = parse_overrides(a.sets);
  build_scenario(a.scenario, cfg);  // validate overrides up front
  viewer::ViewerSession<float> session(a.scenario, cfg, a.envs, a.seed);
  viewer::ViewerServer<float> server(session, a.host, static_cast<std::uint16_t>(a.port));
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving " << a.scenario << " on ws://" << a.host << ':' << server.port() << '\n';
  server.run(a.tick_rate, a.ticks);
  g_server = nullptr;
  return 0;
#else
  (void)a;
  throw std::runtime_error("this build has no viewer bridge (BATCHSIM_BUILD_VIEWER=OFF)");
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vectorized 2D multi-agent simulator"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time vectorized vs sequential stepping, write CSV");
  b->add_option("--scenario", bench.scenario, "Scenario name")->capture_default_str();
  b->add_option("--envs", bench.envs, "Ascending comma-separated env counts")->capture_default_str();
  b->add_option("--steps", bench.steps, "Timed steps per count")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--mode", bench.mode, "vectorized, sequential or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"vectorized", "sequential", "both"}));
  b->add_option("--out", bench.out, "CSV output path")->capture_default_str();
  b->add_option("--threads", bench.threads, "Worker threads (1 = serial, 0 = all cores)")->capture_default_str();
  b->add_option("--seed", bench.seed, "Seed")->capture_default_str();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Headless rollout with the heuristic or a random policy");
  r->add_option("--scenario", run.scenario, "Scenario name")->required();
  r->add_option("--policy", run.policy, "heuristic or random")->capture_default_str()->check(CLI::IsMember({"heuristic", "random"}));
  r->add_option("--envs", run.envs, "Parallel environments")->capture_default_str();
  r->add_option("--steps", run.steps, "Episode horizon (0 = scenario default)")->capture_default_str();
  r->add_option("--seed", run.seed, "Seed")->capture_default_str();
  r->add_option("--set", run.sets, "Scenario override key=value (repeatable)");
  r->add_option("--dump-frames", run.dump_frames, "Directory for one JSON frame (env 0) per step");
  r->add_option("--threads", run.threads, "Worker threads (1 = serial, 0 = all cores)")->capture_default_str();

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "WebSocket viewer bridge");
  s->add_option("--scenario", serve.scenario, "Scenario name")->capture_default_str();
  s->add_option("--envs", serve.envs, "Parallel environments")->capture_default_str();
  s->add_option("--host", serve.host, "Bind address")->capture_default_str();
  s->add_option("--port", serve.port, "Port")->capture_default_str();
  s->add_option("--tick-rate", serve.tick_rate, "Steps per second")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", serve.seed, "Seed")->capture_default_str();
  s->add_option("--set", serve.sets, "Scenario override key=value (repeatable)");
  s->add_option("--ticks", serve.ticks, "Stop after this many steps (0 = run until interrupted)")->capture_default_str();

  auto* l = app.add_subcommand("list-scenarios", "Print the registered scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (l->parsed()) {
      for (auto name : scenario_names()) std::cout << name << '\n';
      return 0;
    }
    if (b->parsed()) return cmd_bench(bench);
    if (r->parsed()) return cmd_run(run);
    if (s->parsed()) return cmd_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
