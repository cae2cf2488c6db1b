#include "ebrake/shield.hpp"

#include <ostream>

#include "ebrake/env.hpp"
#include "ebrake/format.hpp"
#include "ebrake/harm.hpp"

namespace ebrake {

Controller policy_controller(const PolicyNetwork& policy) {
  return [&policy](const SimState& state, const ScenarioConfig& scenario) {
    const auto& v2 = scenario.vehicles[1];
    return scale_action(policy.act(observe(state, scenario)), v2.decel_cap, v2.accel_cap);
  };
}

double predict_harm(const PolicyNetwork& policy, const ScenarioConfig& scenario) {
  const Trajectory t = rollout(scenario, policy_controller(policy));
  return accumulate(t.events, CountingPolicy::kFirstPerPair).total;
}

int decide(double h_rl, double h_star) { return h_rl <= h_star ? 1 : 0; }

namespace {

ShieldedController select(const PolicyNetwork& policy, double h_rl, const BaselineSolution& baseline,
                          BrakeRelease release) {
  ShieldedController out;
  out.decision.h_rl = h_rl;
  out.decision.h_star = baseline.h_star;
  out.decision.a_star = baseline.a_star;
  out.decision.beta_safe = decide(h_rl, baseline.h_star);
  if (out.decision.beta_safe == 1) {
    out.controller = policy_controller(policy);
  } else {
    out.controller = constant_decel_controller(baseline.a_star, release);
    out.options = step_options(release);
  }
  return out;
}

}  // namespace

ShieldedController shielded_controller(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                                       const BaselineSolution& baseline, BrakeRelease release) {
  return select(policy, predict_harm(policy, scenario), baseline, release);
}

ShieldedController plan_hybrid(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                               BaselineOptions options) {
  const double h_rl = predict_harm(policy, scenario);
  if (h_rl == 0.0) {
    ShieldedController out;
    out.decision.h_rl = 0.0;
    out.controller = policy_controller(policy);
    return out;
  }
  options.dt.reset();
  return select(policy, h_rl, solve(scenario, options), options.release);
}

HybridOutcome run_hybrid(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                         const BaselineOptions& options) {
  const ShieldedController plan = plan_hybrid(policy, scenario, options);
  HybridOutcome out;
  out.decision = plan.decision;
  out.trajectory = rollout(scenario, plan.controller, plan.options);
  out.executed_harm = accumulate(out.trajectory.events, CountingPolicy::kFirstPerPair).total;
  return out;
}

void write_decision_header(std::ostream& out) {
  out << "scenario_id,h_rl,h_star,a_star,beta_safe,executed_harm\n";
}

void write_decision_row(std::ostream& out, std::size_t scenario_id, const HybridOutcome& o) {
  out << scenario_id << ',' << csv_number(o.decision.h_rl) << ',';
  if (o.decision.h_star) out << csv_number(*o.decision.h_star);
  out << ',';
  if (o.decision.a_star) out << csv_number(*o.decision.a_star);
  out << ',' << o.decision.beta_safe << ',' << csv_number(o.executed_harm) << '\n';
}

}  // namespace ebrake
