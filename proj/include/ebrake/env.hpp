#pragma once

// The braking task as an episodic decision process for the middle vehicle:
// normalized observations, scaled actions and the shaped reward.

#include <array>
#include <span>
#include <vector>

#include "ebrake/physics.hpp"

namespace ebrake {

inline constexpr int kObsDim = 9;
inline constexpr double kVelocityScale = 30.0;  // m/s
inline constexpr double kGapScale = 50.0;       // m
inline constexpr double kAccelScale = 10.0;     // m/s^2

/// v1, v2, v3, d1, d2, u1, u3, last_u2, time since tau2 (over the horizon).
using Observation = std::array<double, kObsDim>;

struct RewardWeights {
  double w_h = 1.0;
  double w_p = 0.5;
  double w_j = 1e-4;
  std::array<double, kPairCount> k_energy{1.0, 1.0};
  double k_d = 0.5;
  double d_safe = 1.0;     // m
  double d_target = 5.0;   // m
  double tau_scale = 2.0;  // s
  double r_safe = 10.0;
};

std::vector<ValidationError> validate(const RewardWeights& weights);

/// Accelerations currently applied to the lead and rear vehicles.
double lead_applied(const SimState& state, const ScenarioConfig& scenario);
double rear_applied(const SimState& state, const ScenarioConfig& scenario);

Observation observe(const SimState& state, const ScenarioConfig& scenario);

/// Affine map of raw in [-1, 1] (clipped first) onto [-decel_cap, accel_cap].
double scale_action(double raw, double decel_cap, double accel_cap);

double r_collision(std::span<const CollisionEvent> events, const RewardWeights& weights);

/// Time-to-collision and distance penalties, each squashed by a sigmoid. A
/// pair that is not closing has no time-to-collision penalty.
double r_risk(double d1, double d2, double v_rel1, double v_rel2, const RewardWeights& weights);

double r_jerk(double u2_now, double u2_prev, double dt);

double r_terminal(bool ended, bool any_collision, double r_safe);

struct RewardComponents {
  double collision = 0.0;
  double risk = 0.0;
  double jerk = 0.0;
  double terminal = 0.0;
};

double total_reward(const RewardComponents& parts, const RewardWeights& weights);

struct EnvStep {
  Observation obs{};
  double reward = 0.0;
  bool done = false;
  RewardComponents parts;
  std::vector<CollisionEvent> events;
};

/// One episode at a time. reset() runs the periods before the middle vehicle
/// can react; impacts in that interval are charged to the first decision.
class BrakingEnv {
 public:
  explicit BrakingEnv(RewardWeights weights = {});

  Observation reset(const ScenarioConfig& scenario);

  /// Requires an episode in progress (reset called, not done).
  EnvStep step(double raw_action);

  bool done() const { return done_; }
  const SimState& state() const { return state_; }
  const ScenarioConfig& scenario() const { return scenario_; }
  const std::vector<CollisionEvent>& events() const { return events_; }
  const RewardWeights& weights() const { return weights_; }

 private:
  bool finished() const;

  RewardWeights weights_;
  ScenarioConfig scenario_;
  SimState state_;
  std::vector<CollisionEvent> events_;
  std::vector<CollisionEvent> pending_;
  bool done_ = true;
};

}  // namespace ebrake
