#pragma once

// Runtime selection between the learned policy and the harm-minimizing
// constant deceleration, based on a closed-loop harm prediction.

#include <iosfwd>
#include <optional>
#include <vector>

#include "ebrake/baseline.hpp"
#include "ebrake/networks.hpp"

namespace ebrake {

/// Deterministic policy command. The controller refers to `policy`, which
/// must outlive it.
Controller policy_controller(const PolicyNetwork& policy);

/// First-per-pair harm of a closed-loop rollout under the mean action.
double predict_harm(const PolicyNetwork& policy, const ScenarioConfig& scenario);

/// 1 when the policy is at least as safe as the bound (ties keep the policy).
int decide(double h_rl, double h_star);

struct ShieldDecision {
  int beta_safe = 1;
  double h_rl = 0.0;
  std::optional<double> h_star;  // absent when no baseline was needed
  std::optional<double> a_star;
};

struct ShieldedController {
  ShieldDecision decision;
  Controller controller;
  StepOptions options;  // to be passed to rollout with the controller
};

/// Selects between the policy and `baseline` (solved at the scenario's period).
ShieldedController shielded_controller(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                                       const BaselineSolution& baseline,
                                       BrakeRelease release = kDefaultRelease);

/// Predicts first and solves the baseline only when the prediction is not
/// collision-free. Any period override in `options` is ignored so that the
/// bound is computed on the execution grid.
ShieldedController plan_hybrid(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                               BaselineOptions options = {});

struct HybridOutcome {
  ShieldDecision decision;
  double executed_harm = 0.0;
  Trajectory trajectory;
};

HybridOutcome run_hybrid(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                         const BaselineOptions& options = {});

/// Columns: scenario_id,h_rl,h_star,a_star,beta_safe,executed_harm. Fields of
/// a baseline that was not solved are empty.
void write_decision_header(std::ostream& out);
void write_decision_row(std::ostream& out, std::size_t scenario_id, const HybridOutcome& outcome);

}  // namespace ebrake
