#include "ebrake/ebrake.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <variant>

#include "ebrake/checkpoint.hpp"
#include "ebrake/format.hpp"
#include "ebrake/parallel.hpp"
#include "ebrake/config.hpp"
#include "ebrake/eval.hpp"
#include "ebrake/train.hpp"

using namespace ebrake;

struct eb_config {
  std::variant<ScenarioConfig, ScenarioFamily, RewardWeights, TrainerConfig> value;
};

struct eb_policy {
  std::shared_ptr<const PolicyNetwork> net;
};

struct eb_strategy_set {
  std::vector<Strategy> strategies;
  double grid_step = 0.01;
};

struct eb_eval_result {
  EvalResult result;
};

namespace {

thread_local std::string g_error;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

eb_status fail(eb_status status, const std::string& message) {
  g_error = message;
  return status;
}

template <class Fn>
eb_status guard(Fn&& fn) {
  try {
    fn();
    g_error.clear();
    return EB_OK;
  } catch (const ConfigError& e) {
    return fail(EB_ERR_INVALID_CONFIG, e.what());
  } catch (const NotFound& e) {
    return fail(EB_ERR_NOT_FOUND, e.what());
  } catch (const CheckpointError& e) {
    return fail(EB_ERR_IO, e.what());
  } catch (const IoError& e) {
    return fail(EB_ERR_IO, e.what());
  } catch (const TrainingError& e) {
    return fail(EB_ERR_TRAINING, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(EB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(EB_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(EB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EB_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

eb_status copy_out(const std::string& text, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf) return len == 0 ? EB_OK : fail(EB_ERR_INVALID_ARGUMENT, "null buffer");
  if (len < text.size() + 1) return fail(EB_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return EB_OK;
}

template <class T>
const T& as(const eb_config* config, const char* what) {
  require(config != nullptr, "null config");
  const T* p = std::get_if<T>(&config->value);
  if (!p) throw std::invalid_argument(std::string("config is not a ") + what + " config");
  return *p;
}

template <class Fn>
void write_file(const char* path, Fn&& fn) {
  require(path != nullptr, "null path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(std::string("cannot write '") + path + "'");
  fn(out);
  out.flush();
  if (!out) throw IoError(std::string("failed writing '") + path + "'");
}

ScenarioFamily family_or_default(const eb_config* family) {
  return family ? as<ScenarioFamily>(family, "family") : ScenarioFamily::preset("random");
}

}  // namespace

extern "C" {

const char* eb_version(void) { return EBRAKE_VERSION_STRING; }

const char* eb_last_error(void) { return g_error.c_str(); }

const char* eb_status_string(eb_status status) {
  switch (status) {
    case EB_OK: return "ok";
    case EB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EB_ERR_INVALID_CONFIG: return "invalid config";
    case EB_ERR_IO: return "i/o error";
    case EB_ERR_NOT_FOUND: return "not found";
    case EB_ERR_NUMERIC: return "numeric error";
    case EB_ERR_TRAINING: return "training failure";
    case EB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

eb_status eb_config_new(eb_config_kind kind, const char* preset, eb_config** out) {
  return guard([&] {
    require(out != nullptr, "null output handle");
    const std::string p = preset ? preset : "";
    auto config = std::make_unique<eb_config>();
    switch (kind) {
      case EB_CONFIG_SCENARIO:
        if (!p.empty() && p != "reference" && p != "default") throw ConfigError("unknown scenario preset '" + p + "'");
        config->value = ScenarioConfig::reference();
        break;
      case EB_CONFIG_FAMILY:
        config->value = ScenarioFamily::preset(p.empty() ? "random" : p);
        break;
      case EB_CONFIG_WEIGHTS:
        if (!p.empty() && p != "default") throw ConfigError("unknown weights preset '" + p + "'");
        config->value = RewardWeights{};
        break;
      case EB_CONFIG_TRAINER:
        if (!p.empty() && p != "default") throw ConfigError("unknown trainer preset '" + p + "'");
        config->value = TrainerConfig{};
        break;
      default:
        throw std::invalid_argument("unknown config kind");
    }
    *out = config.release();
  });
}

void eb_config_free(eb_config* config) { delete config; }

eb_status eb_config_kind_of(const eb_config* config, eb_config_kind* out) {
  return guard([&] {
    require(config && out, "null argument");
    *out = static_cast<eb_config_kind>(config->value.index());
  });
}

eb_status eb_config_load(eb_config* config, const char* path) {
  return guard([&] {
    require(config && path, "null argument");
    if (!std::filesystem::exists(path)) throw NotFound(std::string("config not found: ") + path);
    std::visit([&](auto& v) { load_config_file(v, path); }, config->value);
  });
}

eb_status eb_config_set(eb_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config && key && value, "null argument");
    std::visit([&](auto& v) { ConfigSchema<std::decay_t<decltype(v)>>::set(v, key, value); }, config->value);
  });
}

eb_status eb_config_get(const eb_config* config, const char* key, char* buf, size_t len, size_t* needed) {
  std::string text;
  const eb_status s = guard([&] {
    require(config && key, "null argument");
    text = std::visit([&](const auto& v) { return ConfigSchema<std::decay_t<decltype(v)>>::get(v, key); },
                      config->value);
  });
  return s == EB_OK ? copy_out(text, buf, len, needed) : s;
}

eb_status eb_config_dump(const eb_config* config, char* buf, size_t len, size_t* needed) {
  std::string text;
  const eb_status s = guard([&] {
    require(config != nullptr, "null config");
    text = std::visit([](const auto& v) { return dump_config(v); }, config->value);
  });
  return s == EB_OK ? copy_out(text, buf, len, needed) : s;
}

eb_status eb_config_validate(const eb_config* config) {
  return guard([&] {
    require(config != nullptr, "null config");
    const auto errors = std::visit([](const auto& v) { return validate(v); }, config->value);
    if (!errors.empty()) throw ConfigError(join_errors(errors));
  });
}

eb_status eb_policy_new_untrained(eb_algorithm algorithm, const eb_config* trainer, uint64_t seed,
                                  eb_policy** out) {
  return guard([&] {
    require(out != nullptr, "null output handle");
    const TrainerConfig tc = trainer ? as<TrainerConfig>(trainer, "trainer") : TrainerConfig{};
    const Algorithm algo = algorithm == EB_ALGO_SAC ? Algorithm::kSac : Algorithm::kPpo;
    *out = new eb_policy{std::make_shared<const PolicyNetwork>(untrained_policy(algo, tc, seed))};
  });
}

eb_status eb_policy_load(const char* path, eb_policy** out) {
  return guard([&] {
    require(path && out, "null argument");
    if (!std::filesystem::exists(path)) throw NotFound(std::string("checkpoint not found: ") + path);
    *out = new eb_policy{std::make_shared<const PolicyNetwork>(load_policy(std::string(path)))};
  });
}

eb_status eb_policy_save(const eb_policy* policy, const char* path) {
  return guard([&] {
    require(policy && path, "null argument");
    save_policy(std::string(path), *policy->net);
  });
}

void eb_policy_free(eb_policy* policy) { delete policy; }

eb_status eb_policy_act(const eb_policy* policy, const double* obs, size_t n, double* action) {
  return guard([&] {
    require(policy && obs && action, "null argument");
    require(n == kObsDim, "observation must have 9 entries");
    Observation o{};
    std::copy(obs, obs + n, o.begin());
    *action = policy->net->act(o);
  });
}

eb_status eb_train(eb_algorithm algorithm, const eb_config* family, const eb_config* weights,
                   const eb_config* trainer, uint64_t seed, const char* curve_csv, eb_progress_fn progress,
                   void* user, eb_policy** out) {
  return guard([&] {
    require(out != nullptr, "null output handle");
    const ScenarioFamily fam = family_or_default(family);
    const RewardWeights w = weights ? as<RewardWeights>(weights, "weights") : RewardWeights{};
    const TrainerConfig tc = trainer ? as<TrainerConfig>(trainer, "trainer") : TrainerConfig{};
    ProgressFn fn;
    if (progress) {
      fn = [progress, user](const CurvePoint& p) {
        progress(p.iteration, p.env_steps, p.mean_return, p.std_return, user);
      };
    }
    const Algorithm algo = algorithm == EB_ALGO_SAC ? Algorithm::kSac : Algorithm::kPpo;
    TrainResult r = train(algo, fam, w, tc, seed, fn);
    if (curve_csv) write_file(curve_csv, [&](std::ostream& o) { write_curve_csv(o, r.curve); });
    *out = new eb_policy{std::make_shared<const PolicyNetwork>(std::move(r.policy))};
  });
}

eb_status eb_baseline_solve(const eb_config* scenario, double grid_step, double dt, int jobs,
                            const char* curve_csv, eb_baseline_result* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    const ScenarioConfig& sc = as<ScenarioConfig>(scenario, "scenario");
    BaselineOptions opts;
    opts.grid_step = grid_step;
    if (dt > 0.0) opts.dt = dt;
    opts.jobs = jobs;
    const BaselineSolution sol = solve(sc, opts);
    out->a_star = sol.a_star;
    out->h_star = sol.h_star;
    out->has_interval = sol.zero_harm_interval ? 1 : 0;
    out->interval_lo = sol.zero_harm_interval ? sol.zero_harm_interval->first : 0.0;
    out->interval_hi = sol.zero_harm_interval ? sol.zero_harm_interval->second : 0.0;
    out->grid_points = sol.curve.size();
    if (curve_csv) {
      write_file(curve_csv, [&](std::ostream& o) {
        o << "decel,harm\n";
        for (const auto& [a, h] : sol.curve) o << csv_number(a) << ',' << csv_number(h) << '\n';
      });
    }
  });
}

eb_status eb_strategy_set_new(eb_strategy_set** out) {
  return guard([&] {
    require(out != nullptr, "null output handle");
    *out = new eb_strategy_set{};
  });
}

void eb_strategy_set_free(eb_strategy_set* set) { delete set; }

eb_status eb_strategy_set_add(eb_strategy_set* set, eb_strategy_kind kind, const char* name,
                              const eb_policy* policy) {
  return guard([&] {
    require(set != nullptr, "null strategy set");
    require(kind >= EB_STRATEGY_NON_ETHICAL && kind <= EB_STRATEGY_HYBRID, "unknown strategy kind");
    const auto k = static_cast<StrategyKind>(kind);
    const bool learned = k == StrategyKind::kDrl || k == StrategyKind::kHybrid;
    require(!learned || policy, "drl and hybrid strategies need a policy");
    Strategy s = make_strategy(k, learned ? policy->net : nullptr);
    if (name) s.name = name;
    require(!s.name.empty() && s.name.size() < sizeof(eb_strategy_summary{}.name), "bad strategy name");
    set->strategies.push_back(std::move(s));
  });
}

eb_status eb_strategy_set_size(const eb_strategy_set* set, size_t* out) {
  return guard([&] {
    require(set && out, "null argument");
    *out = set->strategies.size();
  });
}

eb_status eb_strategy_set_grid_step(eb_strategy_set* set, double grid_step) {
  return guard([&] {
    require(set != nullptr, "null strategy set");
    require(grid_step > 0.0, "grid step must be positive");
    set->grid_step = grid_step;
  });
}

eb_status eb_evaluate(const eb_strategy_set* set, const eb_config* family, int jobs, eb_eval_result** out) {
  return guard([&] {
    require(set && out, "null argument");
    require(!set->strategies.empty(), "empty strategy set");
    const ScenarioFamily fam = family_or_default(family);
    EvalOptions opts;
    opts.jobs = jobs;
    opts.baseline.grid_step = set->grid_step;
    auto r = std::make_unique<eb_eval_result>();
    r->result = evaluate(set->strategies, sample_scenarios(fam), opts);
    *out = r.release();
  });
}

void eb_eval_result_free(eb_eval_result* result) { delete result; }

eb_status eb_eval_result_count(const eb_eval_result* result, size_t* out) {
  return guard([&] {
    require(result && out, "null argument");
    *out = result->result.summaries.size();
  });
}

eb_status eb_eval_result_summary(const eb_eval_result* result, size_t index, eb_strategy_summary* out) {
  return guard([&] {
    require(result && out, "null argument");
    require(index < result->result.summaries.size(), "strategy index out of range");
    const StrategySummary& s = result->result.summaries[index];
    *out = eb_strategy_summary{};
    std::snprintf(out->name, sizeof out->name, "%s", s.name.c_str());
    out->episodes = s.episodes;
    out->failed = s.failed;
    out->collisions = s.collisions;
    out->collision_rate = s.collision_rate;
    out->avg_harm = s.avg_harm;
    out->harm_decrease = s.harm_decrease;
    out->decrease_defined = s.decrease_defined ? 1 : 0;
  });
}

eb_status eb_eval_result_table(const eb_eval_result* result, char* buf, size_t len, size_t* needed) {
  std::string text;
  const eb_status s = guard([&] {
    require(result != nullptr, "null result");
    text = format_table(result->result);
  });
  return s == EB_OK ? copy_out(text, buf, len, needed) : s;
}

eb_status eb_eval_result_write_summary(const eb_eval_result* result, const char* path) {
  return guard([&] {
    require(result != nullptr, "null result");
    write_file(path, [&](std::ostream& o) { write_summary_csv(o, result->result); });
  });
}

eb_status eb_eval_result_write_episodes(const eb_eval_result* result, const char* path) {
  return guard([&] {
    require(result != nullptr, "null result");
    write_file(path, [&](std::ostream& o) { write_episodes_csv(o, result->result); });
  });
}

eb_status eb_run_hybrid(const eb_policy* policy, const eb_config* family, double grid_step, int jobs,
                        const char* decision_csv, eb_hybrid_totals* out) {
  return guard([&] {
    require(policy != nullptr, "null policy");
    require(grid_step > 0.0, "grid step must be positive");
    const std::vector<ScenarioConfig> scenarios = sample_scenarios(family_or_default(family));
    BaselineOptions opts;
    opts.grid_step = grid_step;
    std::vector<HybridOutcome> outcomes(scenarios.size());
    parallel_for(scenarios.size(), jobs, [&](std::size_t i) {
      outcomes[i] = run_hybrid(*policy->net, scenarios[i], opts);
      outcomes[i].trajectory = {};
    });
    eb_hybrid_totals totals{};
    double harm = 0.0;
    for (const auto& o : outcomes) {
      ++totals.episodes;
      totals.drl_selected += o.decision.beta_safe;
      harm += o.executed_harm;
    }
    totals.avg_executed_harm = totals.episodes > 0 ? harm / totals.episodes : 0.0;
    if (decision_csv) {
      write_file(decision_csv, [&](std::ostream& o) {
        write_decision_header(o);
        for (std::size_t i = 0; i < outcomes.size(); ++i) write_decision_row(o, i, outcomes[i]);
      });
    }
    if (out) *out = totals;
  });
}

eb_status eb_export_distance_curve(const eb_strategy_set* set, const eb_config* scenario,
                                   const double* distances, size_t count, int samples, uint64_t seed,
                                   int jobs, const char* path) {
  return guard([&] {
    require(set != nullptr, "null strategy set");
    const ScenarioConfig& sc = as<ScenarioConfig>(scenario, "scenario");
    const std::vector<double> grid =
        distances ? std::vector<double>(distances, distances + count) : default_distance_grid();
    EvalOptions opts;
    opts.jobs = jobs;
    opts.baseline.grid_step = set->grid_step;
    const auto rows = harm_vs_distance_curve(set->strategies, sc, grid, samples, seed, opts);
    write_file(path, [&](std::ostream& o) { write_distance_csv(o, rows); });
  });
}

eb_status eb_export_delay_curve(const eb_strategy_set* set, const eb_config* scenario, const double* tau2,
                                const double* tau3, size_t count, int jobs, const char* path) {
  return guard([&] {
    require(set != nullptr, "null strategy set");
    require((tau2 == nullptr) == (tau3 == nullptr), "tau2 and tau3 must both be given or both be NULL");
    const ScenarioConfig& sc = as<ScenarioConfig>(scenario, "scenario");
    std::vector<std::pair<double, double>> pairs;
    if (tau2) {
      for (size_t i = 0; i < count; ++i) pairs.emplace_back(tau2[i], tau3[i]);
    } else {
      pairs = default_delay_pairs();
    }
    EvalOptions opts;
    opts.jobs = jobs;
    opts.baseline.grid_step = set->grid_step;
    const auto rows = harm_vs_delay(set->strategies, sc, pairs, opts);
    write_file(path, [&](std::ostream& o) { write_delay_csv(o, rows); });
  });
}

eb_status eb_export_trajectory(const eb_strategy_set* set, size_t index, const eb_config* scenario,
                               const char* path) {
  return guard([&] {
    require(set != nullptr, "null strategy set");
    require(index < set->strategies.size(), "strategy index out of range");
    const ScenarioConfig& sc = as<ScenarioConfig>(scenario, "scenario");
    BaselineOptions opts;
    opts.grid_step = set->grid_step;
    const Trajectory t = strategy_trajectory(set->strategies[index], sc, opts);
    write_file(path, [&](std::ostream& o) { write_trajectory_csv(o, t, sc); });
  });
}

eb_status eb_config_trajectory_scenario(const char* name, eb_config** out) {
  return guard([&] {
    require(name && out, "null argument");
    for (const auto& [n, sc] : trajectory_scenarios()) {
      if (n == name) {
        *out = new eb_config{sc};
        return;
      }
    }
    throw NotFound(std::string("unknown trajectory scenario '") + name + "'");
  });
}

}  // extern "C"
