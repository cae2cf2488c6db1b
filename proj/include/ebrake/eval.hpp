#pragma once

// Monte-Carlo comparison of braking strategies and the curve data built on it.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebrake/shield.hpp"

namespace ebrake {

enum class StrategyKind { kNonEthical, kBaseline, kDrl, kHybrid };

/// "non-ethical", "baseline", "drl", "hybrid".
const char* to_string(StrategyKind kind);
StrategyKind parse_strategy(const std::string& name);

struct Strategy {
  std::string name;
  StrategyKind kind = StrategyKind::kNonEthical;
  std::shared_ptr<const PolicyNetwork> policy;  // drl and hybrid only
};

/// Named strategy with the default display name.
Strategy make_strategy(StrategyKind kind, std::shared_ptr<const PolicyNetwork> policy = nullptr);

struct EvalOptions {
  int jobs = 1;
  BaselineOptions baseline;  // grid and release rule; always solved at the scenario period
};

struct EpisodeResult {
  double harm = 0.0;  // first-per-pair
  bool collided = false;
  int events = 0;
  bool failed = false;
  std::string error;
  std::optional<ShieldDecision> decision;  // hybrid only
};

/// Runs one strategy on one scenario. Throws on invalid input.
EpisodeResult run_episode(const Strategy& strategy, const ScenarioConfig& scenario,
                          const BaselineOptions& baseline = {});

Trajectory strategy_trajectory(const Strategy& strategy, const ScenarioConfig& scenario,
                               const BaselineOptions& baseline = {});

struct StrategySummary {
  std::string name;
  StrategyKind kind = StrategyKind::kNonEthical;
  int episodes = 0;  // completed
  int failed = 0;
  int collisions = 0;  // episodes with at least one collision
  double collision_rate = 0.0;
  double avg_harm = 0.0;
  double harm_decrease = 0.0;  // 1 - avg_harm / reference avg_harm
  bool decrease_defined = true;  // false when the reference harm is 0
};

struct EvalResult {
  std::vector<StrategySummary> summaries;
  std::vector<std::vector<EpisodeResult>> episodes;  // [strategy][scenario]
  int reference = 0;
};

/// The reference for the harm decrease is the non-ethical strategy if present,
/// else the baseline, else the first strategy. Failed episodes are excluded
/// from the averages and counted separately.
EvalResult evaluate(const std::vector<Strategy>& strategies, const std::vector<ScenarioConfig>& scenarios,
                    const EvalOptions& options = {});

/// Columns: strategy,episodes,failed,collisions,collision_rate,avg_harm,harm_decrease,decrease_defined
void write_summary_csv(std::ostream& out, const EvalResult& result);
/// Columns: scenario_id,strategy,harm,collided,events,failed
void write_episodes_csv(std::ostream& out, const EvalResult& result);
/// Metrics as rows, strategies as columns.
std::string format_table(const EvalResult& result);

struct DistanceCurveRow {
  double total_distance = 0.0;
  std::string strategy;
  double avg_harm = 0.0;
  int samples = 0;
};

/// For each total distance D, `samples` splits d1 ~ U[1, D - 1], d2 = D - d1
/// on top of `fixed`; average first-per-pair harm per strategy.
std::vector<DistanceCurveRow> harm_vs_distance_curve(const std::vector<Strategy>& strategies,
                                                     const ScenarioConfig& fixed,
                                                     const std::vector<double>& distances, int samples,
                                                     std::uint64_t seed, const EvalOptions& options = {});

struct DelayCurveRow {
  double tau2 = 0.0;
  double tau3 = 0.0;
  std::string strategy;
  double harm = 0.0;
};

std::vector<DelayCurveRow> harm_vs_delay(const std::vector<Strategy>& strategies,
                                         const ScenarioConfig& fixed,
                                         const std::vector<std::pair<double, double>>& delays,
                                         const EvalOptions& options = {});

/// Columns: total_distance,strategy,avg_harm,samples
void write_distance_csv(std::ostream& out, const std::vector<DistanceCurveRow>& rows);
/// Columns: tau2,tau3,strategy,harm
void write_delay_csv(std::ostream& out, const std::vector<DelayCurveRow>& rows);

std::vector<double> default_distance_grid();
std::vector<std::pair<double, double>> default_delay_pairs();

/// Reference scenarios for trajectory plots: "s1" and "s2".
std::vector<std::pair<std::string, ScenarioConfig>> trajectory_scenarios();

}  // namespace ebrake
