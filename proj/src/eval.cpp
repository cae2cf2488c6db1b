#include "ebrake/eval.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "ebrake/format.hpp"
#include "ebrake/harm.hpp"
#include "ebrake/parallel.hpp"

namespace ebrake {

namespace {

const PolicyNetwork& require_policy(const Strategy& s) {
  if (!s.policy) throw std::invalid_argument("strategy '" + s.name + "' needs a policy");
  return *s.policy;
}

BaselineSolution solve_here(const ScenarioConfig& scenario, BaselineOptions options) {
  options.dt.reset();
  options.jobs = 1;
  return solve(scenario, options);
}

int reference_index(const std::vector<Strategy>& strategies) {
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (strategies[i].kind == StrategyKind::kNonEthical) return static_cast<int>(i);
  }
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (strategies[i].kind == StrategyKind::kBaseline) return static_cast<int>(i);
  }
  return 0;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

std::string fixed4(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

}  // namespace

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kNonEthical: return "non-ethical";
    case StrategyKind::kBaseline: return "baseline";
    case StrategyKind::kDrl: return "drl";
    case StrategyKind::kHybrid: return "hybrid";
  }
  return "?";
}

StrategyKind parse_strategy(const std::string& name) {
  for (StrategyKind k : {StrategyKind::kNonEthical, StrategyKind::kBaseline, StrategyKind::kDrl,
                         StrategyKind::kHybrid}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown strategy '" + name + "' (expected non-ethical, baseline, drl or hybrid)");
}

Strategy make_strategy(StrategyKind kind, std::shared_ptr<const PolicyNetwork> policy) {
  return {to_string(kind), kind, std::move(policy)};
}

Trajectory strategy_trajectory(const Strategy& strategy, const ScenarioConfig& scenario,
                               const BaselineOptions& baseline) {
  switch (strategy.kind) {
    case StrategyKind::kNonEthical:
      return rollout(scenario, non_ethical_controller(baseline.release), step_options(baseline.release));
    case StrategyKind::kBaseline: {
      const BaselineSolution sol = solve_here(scenario, baseline);
      return rollout(scenario, constant_decel_controller(sol.a_star, baseline.release),
                     step_options(baseline.release));
    }
    case StrategyKind::kDrl:
      return rollout(scenario, policy_controller(require_policy(strategy)));
    case StrategyKind::kHybrid: {
      BaselineOptions opts = baseline;
      opts.jobs = 1;
      return run_hybrid(require_policy(strategy), scenario, opts).trajectory;
    }
  }
  return {};
}

EpisodeResult run_episode(const Strategy& strategy, const ScenarioConfig& scenario,
                          const BaselineOptions& baseline) {
  EpisodeResult r;
  Trajectory t;
  if (strategy.kind == StrategyKind::kHybrid) {
    BaselineOptions opts = baseline;
    opts.jobs = 1;
    HybridOutcome o = run_hybrid(require_policy(strategy), scenario, opts);
    r.decision = o.decision;
    t = std::move(o.trajectory);
  } else {
    t = strategy_trajectory(strategy, scenario, baseline);
  }
  r.harm = accumulate(t.events, CountingPolicy::kFirstPerPair).total;
  r.events = static_cast<int>(t.events.size());
  r.collided = !t.events.empty();
  return r;
}

EvalResult evaluate(const std::vector<Strategy>& strategies, const std::vector<ScenarioConfig>& scenarios,
                    const EvalOptions& options) {
  const std::size_t ns = strategies.size();
  const std::size_t ne = scenarios.size();
  EvalResult result;
  result.episodes.assign(ns, std::vector<EpisodeResult>(ne));
  parallel_for(ns * ne, options.jobs, [&](std::size_t k) {
    const std::size_t s = k % ns;
    const std::size_t e = k / ns;
    EpisodeResult& slot = result.episodes[s][e];
    try {
      slot = run_episode(strategies[s], scenarios[e], options.baseline);
    } catch (const std::exception& ex) {
      slot = EpisodeResult{};
      slot.failed = true;
      slot.error = ex.what();
    }
  });

  for (std::size_t s = 0; s < ns; ++s) {
    StrategySummary sum;
    sum.name = strategies[s].name;
    sum.kind = strategies[s].kind;
    double harm = 0.0;
    for (const auto& ep : result.episodes[s]) {
      if (ep.failed) {
        ++sum.failed;
        continue;
      }
      ++sum.episodes;
      harm += ep.harm;
      if (ep.collided) ++sum.collisions;
    }
    if (sum.episodes > 0) {
      sum.avg_harm = harm / sum.episodes;
      sum.collision_rate = static_cast<double>(sum.collisions) / sum.episodes;
    }
    result.summaries.push_back(sum);
  }
  if (ns == 0) return result;
  result.reference = reference_index(strategies);
  const double ref = result.summaries[static_cast<std::size_t>(result.reference)].avg_harm;
  for (std::size_t s = 0; s < ns; ++s) {
    auto& sum = result.summaries[s];
    if (static_cast<int>(s) == result.reference) {
      sum.harm_decrease = 0.0;
      sum.decrease_defined = ref > 0.0;
    } else if (ref > 0.0) {
      sum.harm_decrease = 1.0 - sum.avg_harm / ref;
    } else {
      sum.harm_decrease = 0.0;
      sum.decrease_defined = false;
    }
  }
  return result;
}

void write_summary_csv(std::ostream& out, const EvalResult& result) {
  out << "strategy,episodes,failed,collisions,collision_rate,avg_harm,harm_decrease,decrease_defined\n";
  for (const auto& s : result.summaries) {
    out << s.name << ',' << s.episodes << ',' << s.failed << ',' << s.collisions << ','
        << csv_number(s.collision_rate) << ',' << csv_number(s.avg_harm) << ','
        << csv_number(s.harm_decrease) << ',' << (s.decrease_defined ? 1 : 0) << '\n';
  }
}

void write_episodes_csv(std::ostream& out, const EvalResult& result) {
  out << "scenario_id,strategy,harm,collided,events,failed\n";
  const std::size_t ne = result.episodes.empty() ? 0 : result.episodes.front().size();
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t s = 0; s < result.summaries.size(); ++s) {
      const auto& ep = result.episodes[s][e];
      out << e << ',' << result.summaries[s].name << ',' << csv_number(ep.harm) << ','
          << (ep.collided ? 1 : 0) << ',' << ep.events << ',' << (ep.failed ? 1 : 0) << '\n';
    }
  }
}

std::string format_table(const EvalResult& result) {
  std::vector<std::vector<std::string>> rows = {{"Metric"}, {"Collisions"}, {"Collision rate"},
                                                {"Average harm"}, {"Harm decrease"}};
  for (const auto& s : result.summaries) {
    rows[0].push_back(s.name);
    rows[1].push_back(std::to_string(s.collisions));
    rows[2].push_back(percent(s.collision_rate));
    rows[3].push_back(fixed4(s.avg_harm));
    rows[4].push_back(s.decrease_defined ? percent(s.harm_decrease) : "n/a (zero reference harm)");
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::vector<DistanceCurveRow> harm_vs_distance_curve(const std::vector<Strategy>& strategies,
                                                     const ScenarioConfig& fixed,
                                                     const std::vector<double>& distances, int samples,
                                                     std::uint64_t seed, const EvalOptions& options) {
  if (samples < 1) throw std::invalid_argument("harm_vs_distance_curve: samples must be >= 1");
  std::vector<DistanceCurveRow> rows;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double total = distances[i];
    if (!(total > 2.0)) throw std::invalid_argument("total distance must exceed 2 m");
    std::vector<ScenarioConfig> scenarios;
    for (int k = 0; k < samples; ++k) {
      Rng rng(derive_seed(seed, streams::kSplit, i * 1000003ULL + static_cast<std::uint64_t>(k)));
      ScenarioConfig s = fixed;
      s.d1_0 = rng.uniform(1.0, total - 1.0);
      s.d2_0 = total - s.d1_0;
      scenarios.push_back(s);
    }
    const EvalResult r = evaluate(strategies, scenarios, options);
    for (const auto& sum : r.summaries) rows.push_back({total, sum.name, sum.avg_harm, sum.episodes});
  }
  return rows;
}

std::vector<DelayCurveRow> harm_vs_delay(const std::vector<Strategy>& strategies,
                                         const ScenarioConfig& fixed,
                                         const std::vector<std::pair<double, double>>& delays,
                                         const EvalOptions& options) {
  std::vector<ScenarioConfig> scenarios;
  for (const auto& [t2, t3] : delays) {
    ScenarioConfig s = fixed;
    s.tau2 = t2;
    s.tau3 = t3;
    if (auto errors = validate(s); !errors.empty()) {
      throw ConfigError("invalid delay pair: " + join_errors(errors));
    }
    scenarios.push_back(s);
  }
  const EvalResult r = evaluate(strategies, scenarios, options);
  std::vector<DelayCurveRow> rows;
  for (std::size_t d = 0; d < delays.size(); ++d) {
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      const auto& ep = r.episodes[s][d];
      if (ep.failed) throw std::runtime_error("delay curve episode failed: " + ep.error);
      rows.push_back({delays[d].first, delays[d].second, r.summaries[s].name, ep.harm});
    }
  }
  return rows;
}

void write_distance_csv(std::ostream& out, const std::vector<DistanceCurveRow>& rows) {
  out << "total_distance,strategy,avg_harm,samples\n";
  for (const auto& r : rows) {
    out << csv_number(r.total_distance) << ',' << r.strategy << ',' << csv_number(r.avg_harm) << ','
        << r.samples << '\n';
  }
}

void write_delay_csv(std::ostream& out, const std::vector<DelayCurveRow>& rows) {
  out << "tau2,tau3,strategy,harm\n";
  for (const auto& r : rows) {
    out << csv_number(r.tau2) << ',' << csv_number(r.tau3) << ',' << r.strategy << ','
        << csv_number(r.harm) << '\n';
  }
}

std::vector<double> default_distance_grid() {
  std::vector<double> grid;
  for (int d = 4; d <= 40; d += 2) grid.push_back(d);
  return grid;
}

std::vector<std::pair<double, double>> default_delay_pairs() {
  return {{0.0, 0.0}, {0.5, 0.8}, {0.8, 1.2}, {1.0, 1.5}};
}

std::vector<std::pair<std::string, ScenarioConfig>> trajectory_scenarios() {
  ScenarioConfig s1 = ScenarioConfig::reference();
  s1.d1_0 = 10.0;
  s1.d2_0 = 8.0;
  s1.v0 = {20.0, 18.0, 20.0};
  ScenarioConfig s2 = ScenarioConfig::reference();
  s2.d1_0 = 5.0;
  s2.d2_0 = 9.0;
  s2.v0 = {22.0, 18.0, 20.0};
  return {{"s1", s1}, {"s2", s2}};
}

}  // namespace ebrake
