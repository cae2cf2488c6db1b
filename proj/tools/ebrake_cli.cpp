// Command-line front end over the ebrake C API.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "ebrake/ebrake.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Raised for any failed library call; carries the status for the exit code.
struct Failure : std::runtime_error {
  eb_status status;
  Failure(eb_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(eb_status s, const std::string& context = {}) {
  if (s == EB_OK) return;
  std::string msg = eb_last_error();
  if (msg.empty()) msg = eb_status_string(s);
  throw Failure(s, context.empty() ? msg : context + ": " + msg);
}

struct ConfigDeleter {
  void operator()(eb_config* c) const { eb_config_free(c); }
};
struct PolicyDeleter {
  void operator()(eb_policy* p) const { eb_policy_free(p); }
};
struct SetDeleter {
  void operator()(eb_strategy_set* s) const { eb_strategy_set_free(s); }
};
struct ResultDeleter {
  void operator()(eb_eval_result* r) const { eb_eval_result_free(r); }
};
using Config = std::unique_ptr<eb_config, ConfigDeleter>;
using Policy = std::unique_ptr<eb_policy, PolicyDeleter>;
using StrategySet = std::unique_ptr<eb_strategy_set, SetDeleter>;
using Result = std::unique_ptr<eb_eval_result, ResultDeleter>;

Config new_config(eb_config_kind kind, const std::string& preset = {}) {
  eb_config* c = nullptr;
  check(eb_config_new(kind, preset.empty() ? nullptr : preset.c_str(), &c));
  return Config(c);
}

std::string dump(const eb_config* c) {
  size_t needed = 0;
  check(eb_config_dump(c, nullptr, 0, &needed));
  std::string text(needed, '\0');
  check(eb_config_dump(c, text.data(), text.size(), &needed));
  text.resize(needed - 1);
  return text;
}

Policy load_policy(const std::string& path) {
  eb_policy* p = nullptr;
  check(eb_policy_load(path.c_str(), &p));
  return Policy(p);
}

const char* kind_name(eb_config_kind kind) {
  switch (kind) {
    case EB_CONFIG_SCENARIO: return "scenario";
    case EB_CONFIG_FAMILY: return "family";
    case EB_CONFIG_WEIGHTS: return "weights";
    case EB_CONFIG_TRAINER: return "trainer";
  }
  return "?";
}

// Options shared by every subcommand.
struct Common {
  std::string out_dir;
  uint64_t seed = 1;
  bool seed_given = false;
  int jobs = 1;
  std::map<eb_config_kind, std::string> files;
  std::vector<std::string> sets;
  std::string family_preset = "random";
  int count = 0;
};

void add_common(CLI::App* cmd, Common& c, std::initializer_list<eb_config_kind> kinds) {
  cmd->add_option("--out", c.out_dir, "Output directory (default $EBRAKE_OUT_DIR or .)");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option_function<uint64_t>(
      "--seed", [&c](const uint64_t& s) { c.seed = s; c.seed_given = true; }, "Master seed");
  for (eb_config_kind kind : kinds) {
    cmd->add_option(std::string("--") + kind_name(kind) + "-config", c.files[kind],
                    std::string(kind_name(kind)) + " config file (key = value)");
    if (kind == EB_CONFIG_FAMILY) {
      cmd->add_option("--family", c.family_preset, "Family preset: random, low-delay, high-delay, wide-gap");
      cmd->add_option("--count", c.count, "Scenarios drawn from the family")->check(CLI::PositiveNumber);
    }
  }
  cmd->add_option("--set", c.sets, "Override section.key=value (sections: scenario, family, weights, trainer)");
}

// Resolved configuration for one run: defaults < file < flags.
struct Run {
  std::string command;
  Common common;
  fs::path out;
  std::map<eb_config_kind, Config> configs;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::time_t started = std::time(nullptr);

  eb_config* get(eb_config_kind kind) { return configs.at(kind).get(); }

  std::string path(const std::string& name) {
    const fs::path p = out / name;
    outputs.push_back(p.string());
    return p.string();
  }
};

void resolve(Run& run, std::initializer_list<eb_config_kind> kinds) {
  Common& c = run.common;
  if (c.out_dir.empty()) {
    const char* env = std::getenv("EBRAKE_OUT_DIR");
    c.out_dir = env && *env ? env : ".";
  }
  run.out = c.out_dir;
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec) throw Failure(EB_ERR_IO, "cannot create output directory '" + c.out_dir + "': " + ec.message());

  for (eb_config_kind kind : kinds) {
    Config cfg = new_config(kind, kind == EB_CONFIG_FAMILY ? c.family_preset : std::string{});
    const std::string& file = c.files[kind];
    if (!file.empty()) {
      if (!fs::exists(file)) throw Failure(EB_ERR_NOT_FOUND, "config not found: " + file);
      check(eb_config_load(cfg.get(), file.c_str()), file);
    }
    run.configs.emplace(kind, std::move(cfg));
  }
  if (run.configs.count(EB_CONFIG_FAMILY)) {
    eb_config* fam = run.get(EB_CONFIG_FAMILY);
    if (c.seed_given) check(eb_config_set(fam, "seed", std::to_string(c.seed).c_str()), "--seed");
    if (c.count > 0) check(eb_config_set(fam, "count", std::to_string(c.count).c_str()), "--count");
  }
  for (const std::string& s : c.sets) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
      throw Failure(EB_ERR_INVALID_ARGUMENT, "--set expects section.key=value, got '" + s + "'");
    }
    const std::string section = s.substr(0, dot);
    const std::string key = s.substr(dot + 1, eq - dot - 1);
    const std::string value = s.substr(eq + 1);
    bool found = false;
    for (auto& [kind, cfg] : run.configs) {
      if (section == kind_name(kind)) {
        check(eb_config_set(cfg.get(), key.c_str(), value.c_str()), "--set " + s);
        found = true;
      }
    }
    if (!found) throw Failure(EB_ERR_INVALID_ARGUMENT, "--set: section '" + section + "' does not apply to this command");
  }
  for (auto& [kind, cfg] : run.configs) check(eb_config_validate(cfg.get()), kind_name(kind));
}

void write_manifest(Run& run, const ordered_json& extra) {
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&run.started));

  ordered_json m;
  m["command"] = run.command;
  m["tool_version"] = eb_version();
  m["seed"] = run.common.seed;
  m["jobs"] = run.common.jobs;
  m["output_directory"] = run.out.string();
  ordered_json paths = ordered_json::object();
  for (auto& [kind, file] : run.common.files) {
    if (!file.empty()) paths[kind_name(kind)] = file;
  }
  m["config_paths"] = paths;
  m["overrides"] = run.common.sets;
  ordered_json resolved = ordered_json::object();
  for (auto& [kind, cfg] : run.configs) resolved[kind_name(kind)] = dump(cfg.get());
  m["resolved_config"] = resolved;
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["outputs"] = run.outputs;
  m["started_utc"] = stamp;
  m["wall_clock_seconds"] = elapsed;

  const fs::path p = run.out / (run.command + ".manifest.json");
  std::ofstream f(p);
  f << m.dump(2) << '\n';
  if (!f) throw Failure(EB_ERR_IO, "cannot write '" + p.string() + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

eb_strategy_kind parse_kind(const std::string& name) {
  if (name == "non-ethical") return EB_STRATEGY_NON_ETHICAL;
  if (name == "baseline") return EB_STRATEGY_BASELINE;
  if (name == "drl") return EB_STRATEGY_DRL;
  if (name == "hybrid") return EB_STRATEGY_HYBRID;
  throw Failure(EB_ERR_INVALID_ARGUMENT,
                "unknown strategy '" + name + "' (expected non-ethical, baseline, drl, hybrid)");
}

// Builds the strategy set and loads the policy when a learned strategy needs it.
StrategySet build_strategies(const std::string& list, const std::string& policy_path, double grid_step,
                             Policy& policy) {
  eb_strategy_set* raw = nullptr;
  check(eb_strategy_set_new(&raw));
  StrategySet set(raw);
  check(eb_strategy_set_grid_step(set.get(), grid_step), "--grid-step");
  const auto names = split_list(list);
  if (names.empty()) throw Failure(EB_ERR_INVALID_ARGUMENT, "--strategies is empty");
  for (const std::string& name : names) {
    const eb_strategy_kind kind = parse_kind(name);
    if ((kind == EB_STRATEGY_DRL || kind == EB_STRATEGY_HYBRID) && !policy) {
      if (policy_path.empty()) throw Failure(EB_ERR_INVALID_ARGUMENT, "strategy '" + name + "' needs --policy");
      policy = load_policy(policy_path);
    }
    check(eb_strategy_set_add(set.get(), kind, name.c_str(), policy.get()), name);
  }
  return set;
}

void on_progress(int64_t iteration, int64_t env_steps, double mean, double stddev, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::fprintf(stderr, "iter %lld  steps %lld  return %.3f +/- %.3f\n", static_cast<long long>(iteration),
               static_cast<long long>(env_steps), mean, stddev);
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Network passes allocate and release large temporaries every update; keep
  // them on the heap instead of mapping fresh pages each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"Emergency braking in a three-vehicle platoon: baseline, learners, shield, evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(eb_version()));

  Run run;
  std::function<void()> action;

  // train
  auto* train = app.add_subcommand("train", "Train a PPO or SAC policy");
  std::string algo = "ppo";
  long long steps = -1;
  bool quiet = false;
  std::string name;
  add_common(train, run.common, {EB_CONFIG_FAMILY, EB_CONFIG_WEIGHTS, EB_CONFIG_TRAINER});
  train->add_option("--algo", algo, "ppo or sac")->check(CLI::IsMember({"ppo", "sac"}));
  train->add_option("--steps", steps, "Total environment steps")->check(CLI::NonNegativeNumber);
  train->add_option("--name", name, "Output file stem (default <algo>)");
  train->add_flag("--quiet", quiet, "No progress lines");
  train->callback([&] {
    action = [&] {
      run.command = "train";
      resolve(run, {EB_CONFIG_FAMILY, EB_CONFIG_WEIGHTS, EB_CONFIG_TRAINER});
      eb_config* trainer = run.get(EB_CONFIG_TRAINER);
      if (steps >= 0) check(eb_config_set(trainer, "total_steps", std::to_string(steps).c_str()), "--steps");
      const std::string stem = name.empty() ? algo : name;
      const std::string curve = run.path(stem + "_curve.csv");
      const std::string ckpt = run.path(stem + ".policy");
      eb_policy* raw = nullptr;
      check(eb_train(algo == "sac" ? EB_ALGO_SAC : EB_ALGO_PPO, run.get(EB_CONFIG_FAMILY),
                     run.get(EB_CONFIG_WEIGHTS), trainer, run.common.seed, curve.c_str(), on_progress, &quiet,
                     &raw),
            "training failed");
      Policy policy(raw);
      check(eb_policy_save(policy.get(), ckpt.c_str()));
      std::cout << "checkpoint " << ckpt << "\ncurve " << curve << '\n';
      write_manifest(run, {{"algo", algo}});
    };
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate strategies on a scenario family");
  std::string strategies = "non-ethical,baseline";
  std::string policy_path;
  double grid_step = 0.01;
  add_common(evaluate, run.common, {EB_CONFIG_FAMILY});
  evaluate->add_option("--strategies", strategies, "Comma list of non-ethical, baseline, drl, hybrid");
  evaluate->add_option("--policy", policy_path, "Policy checkpoint for drl and hybrid");
  evaluate->add_option("--grid-step", grid_step, "Baseline deceleration grid step")->check(CLI::PositiveNumber);
  evaluate->callback([&] {
    action = [&] {
      run.command = "evaluate";
      resolve(run, {EB_CONFIG_FAMILY});
      Policy policy;
      StrategySet set = build_strategies(strategies, policy_path, grid_step, policy);
      eb_eval_result* raw = nullptr;
      check(eb_evaluate(set.get(), run.get(EB_CONFIG_FAMILY), run.common.jobs, &raw));
      Result result(raw);
      size_t needed = 0;
      check(eb_eval_result_table(result.get(), nullptr, 0, &needed));
      std::string table(needed, '\0');
      check(eb_eval_result_table(result.get(), table.data(), table.size(), &needed));
      table.resize(needed - 1);
      std::cout << table;
      check(eb_eval_result_write_summary(result.get(), run.path("summary.csv").c_str()));
      check(eb_eval_result_write_episodes(result.get(), run.path("episodes.csv").c_str()));
      write_manifest(run, {{"strategies", strategies}, {"policy", policy_path}, {"grid_step", grid_step}});
    };
  });

  // solve-baseline
  auto* baseline = app.add_subcommand("solve-baseline", "Harm-minimizing constant deceleration for one scenario");
  double dt = 0.005;
  double baseline_step = 0.01;
  add_common(baseline, run.common, {EB_CONFIG_SCENARIO});
  baseline->add_option("--grid-step", baseline_step, "Deceleration grid step")->check(CLI::PositiveNumber);
  baseline->add_option("--dt", dt, "Sweep sampling period (<= 0 keeps the scenario period)");
  baseline->callback([&] {
    action = [&] {
      run.command = "solve-baseline";
      resolve(run, {EB_CONFIG_SCENARIO});
      eb_baseline_result r{};
      check(eb_baseline_solve(run.get(EB_CONFIG_SCENARIO), baseline_step, dt, run.common.jobs,
                              run.path("baseline_curve.csv").c_str(), &r));
      std::printf("a_star %.6g\nH_star %.6g\n", r.a_star, r.h_star);
      if (r.has_interval) {
        std::printf("interval [%.6g, %.6g]\n", r.interval_lo, r.interval_hi);
      } else {
        std::printf("interval none\n");
      }
      ordered_json extra = {{"grid_step", baseline_step}, {"dt", dt}, {"a_star", r.a_star}, {"h_star", r.h_star}};
      extra["interval"] = r.has_interval ? ordered_json::array({r.interval_lo, r.interval_hi}) : ordered_json();
      write_manifest(run, extra);
    };
  });

  // run-hybrid
  auto* hybrid = app.add_subcommand("run-hybrid", "Run the harm shield and log its decisions");
  std::string hybrid_policy;
  double hybrid_step = 0.01;
  add_common(hybrid, run.common, {EB_CONFIG_FAMILY});
  hybrid->add_option("--policy", hybrid_policy, "Policy checkpoint")->required();
  hybrid->add_option("--grid-step", hybrid_step, "Baseline deceleration grid step")->check(CLI::PositiveNumber);
  hybrid->callback([&] {
    action = [&] {
      run.command = "run-hybrid";
      resolve(run, {EB_CONFIG_FAMILY});
      Policy policy = load_policy(hybrid_policy);
      eb_hybrid_totals t{};
      check(eb_run_hybrid(policy.get(), run.get(EB_CONFIG_FAMILY), hybrid_step, run.common.jobs,
                          run.path("decisions.csv").c_str(), &t));
      std::printf("episodes %d\ndrl selected %d\naverage executed harm %.6g\n", t.episodes, t.drl_selected,
                  t.avg_executed_harm);
      write_manifest(run, {{"policy", hybrid_policy},
                           {"grid_step", hybrid_step},
                           {"episodes", t.episodes},
                           {"drl_selected", t.drl_selected},
                           {"avg_executed_harm", t.avg_executed_harm}});
    };
  });

  // export-curves
  auto* curves = app.add_subcommand("export-curves", "Plot-ready harm and trajectory curves");
  std::string curve_strategies = "non-ethical,baseline";
  std::string curve_policy;
  double curve_step = 0.01;
  int samples = 100;
  std::string which = "distance,delay,trajectory";
  add_common(curves, run.common, {EB_CONFIG_SCENARIO});
  curves->add_option("--strategies", curve_strategies, "Comma list of non-ethical, baseline, drl, hybrid");
  curves->add_option("--policy", curve_policy, "Policy checkpoint for drl and hybrid");
  curves->add_option("--grid-step", curve_step, "Baseline deceleration grid step")->check(CLI::PositiveNumber);
  curves->add_option("--samples", samples, "Random splits per total distance")->check(CLI::PositiveNumber);
  curves->add_option("--curves", which, "Comma list of distance, delay, trajectory");
  curves->callback([&] {
    action = [&] {
      run.command = "export-curves";
      resolve(run, {EB_CONFIG_SCENARIO});
      Policy policy;
      StrategySet set = build_strategies(curve_strategies, curve_policy, curve_step, policy);
      eb_config* scenario = run.get(EB_CONFIG_SCENARIO);
      for (const std::string& c : split_list(which)) {
        if (c == "distance") {
          check(eb_export_distance_curve(set.get(), scenario, nullptr, 0, samples, run.common.seed, run.common.jobs,
                                         run.path("harm_vs_distance.csv").c_str()));
        } else if (c == "delay") {
          check(eb_export_delay_curve(set.get(), scenario, nullptr, nullptr, 0, run.common.jobs,
                                      run.path("harm_vs_delay.csv").c_str()));
        } else if (c == "trajectory") {
          const auto names = split_list(curve_strategies);
          for (const char* sc : {"s1", "s2"}) {
            eb_config* raw = nullptr;
            check(eb_config_trajectory_scenario(sc, &raw));
            Config traj(raw);
            for (size_t i = 0; i < names.size(); ++i) {
              const std::string file = std::string("trajectory_") + sc + "_" + names[i] + ".csv";
              check(eb_export_trajectory(set.get(), i, traj.get(), run.path(file).c_str()));
            }
          }
        } else {
          throw Failure(EB_ERR_INVALID_ARGUMENT, "unknown curve '" + c + "'");
        }
      }
      for (const auto& o : run.outputs) std::cout << o << '\n';
      write_manifest(run, {{"strategies", curve_strategies},
                           {"policy", curve_policy},
                           {"grid_step", curve_step},
                           {"samples", samples},
                           {"curves", which}});
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << '\n';
    return f.status == EB_ERR_INVALID_CONFIG || f.status == EB_ERR_INVALID_ARGUMENT ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
