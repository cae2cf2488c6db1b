#include "ebrake/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ebrake {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double pair_risk(double d, double v_rel, const RewardWeights& w) {
  double penalty = -sigmoid(w.k_d * (w.d_target - d));
  if (v_rel > 0.0) {
    const double ttc = (d - w.d_safe) / v_rel;
    penalty -= sigmoid(-ttc / w.tau_scale);
  }
  return penalty;
}

}  // namespace

std::vector<ValidationError> validate(const RewardWeights& w) {
  std::vector<ValidationError> errors;
  auto nonneg = [&](const char* field, double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) errors.push_back({field, "must be >= 0"});
  };
  auto positive = [&](const char* field, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) errors.push_back({field, "must be > 0"});
  };
  nonneg("w_h", w.w_h);
  nonneg("w_p", w.w_p);
  nonneg("w_j", w.w_j);
  nonneg("k_energy_1", w.k_energy[0]);
  nonneg("k_energy_2", w.k_energy[1]);
  positive("k_d", w.k_d);
  nonneg("d_safe", w.d_safe);
  nonneg("d_target", w.d_target);
  positive("tau_scale", w.tau_scale);
  nonneg("r_safe", w.r_safe);
  return errors;
}

double lead_applied(const SimState& state, const ScenarioConfig& scenario) {
  return state.v[0] > 0.0 ? -scenario.vehicles[0].decel_cap : 0.0;
}

double rear_applied(const SimState& state, const ScenarioConfig& scenario) {
  if (time_at(state, scenario) < scenario.tau3 || state.v[2] <= 0.0) return 0.0;
  return -scenario.vehicles[2].decel_cap;
}

Observation observe(const SimState& state, const ScenarioConfig& scenario) {
  const double since = std::max(0.0, time_at(state, scenario) - scenario.tau2);
  return {state.v[0] / kVelocityScale,
          state.v[1] / kVelocityScale,
          state.v[2] / kVelocityScale,
          state.gap(Pair::kFront) / kGapScale,
          state.gap(Pair::kRear) / kGapScale,
          lead_applied(state, scenario) / kAccelScale,
          rear_applied(state, scenario) / kAccelScale,
          state.last_u2 / kAccelScale,
          since / (scenario.horizon * scenario.dt)};
}

double scale_action(double raw, double decel_cap, double accel_cap) {
  const double r = std::clamp(raw, -1.0, 1.0);
  return 0.5 * (accel_cap - decel_cap) + 0.5 * (accel_cap + decel_cap) * r;
}

double r_collision(std::span<const CollisionEvent> events, const RewardWeights& weights) {
  double r = 0.0;
  for (const auto& e : events) {
    r -= weights.k_energy[static_cast<int>(e.pair)] * e.v_rel_pre * e.v_rel_pre;
  }
  return r;
}

double r_risk(double d1, double d2, double v_rel1, double v_rel2, const RewardWeights& weights) {
  return pair_risk(d1, v_rel1, weights) + pair_risk(d2, v_rel2, weights);
}

double r_jerk(double u2_now, double u2_prev, double dt) {
  const double jerk = (u2_now - u2_prev) / dt;
  return -jerk * jerk;
}

double r_terminal(bool ended, bool any_collision, double r_safe) {
  return ended && !any_collision ? r_safe : 0.0;
}

double total_reward(const RewardComponents& p, const RewardWeights& w) {
  return w.w_h * p.collision + w.w_p * p.risk + w.w_j * p.jerk + p.terminal;
}

BrakingEnv::BrakingEnv(RewardWeights weights) : weights_(weights) {}

bool BrakingEnv::finished() const {
  return state_.stopped() || state_.n >= scenario_.horizon;
}

Observation BrakingEnv::reset(const ScenarioConfig& scenario) {
  scenario_ = scenario;
  state_ = initial_state(scenario_);
  events_.clear();
  pending_.clear();
  while (!control_active(state_, scenario_) && !finished()) {
    StepResult r = ebrake::step(state_, 0.0, scenario_);
    pending_.insert(pending_.end(), r.events.begin(), r.events.end());
    state_ = r.state;
  }
  events_ = pending_;
  done_ = finished();
  return observe(state_, scenario_);
}

EnvStep BrakingEnv::step(double raw_action) {
  if (done_) throw std::logic_error("BrakingEnv::step called on a finished episode");
  const auto& veh = scenario_.vehicles;
  const double u2 = scale_action(raw_action, veh[1].decel_cap, veh[1].accel_cap);
  const double prev = state_.last_u2;
  StepResult r = ebrake::step(state_, u2, scenario_);
  state_ = r.state;

  EnvStep out;
  out.events = std::move(pending_);
  pending_.clear();
  out.events.insert(out.events.end(), r.events.begin(), r.events.end());
  events_.insert(events_.end(), r.events.begin(), r.events.end());

  done_ = finished();
  out.parts.collision = r_collision(out.events, weights_);
  out.parts.risk = r_risk(state_.gap(Pair::kFront), state_.gap(Pair::kRear),
                          state_.closing_speed(Pair::kFront), state_.closing_speed(Pair::kRear),
                          weights_);
  out.parts.jerk = r_jerk(r.u2_applied, prev, scenario_.dt);
  out.parts.terminal = r_terminal(done_, !events_.empty(), weights_.r_safe);
  out.reward = total_reward(out.parts, weights_);
  out.done = done_;
  out.obs = observe(state_, scenario_);
  return out;
}

}  // namespace ebrake
