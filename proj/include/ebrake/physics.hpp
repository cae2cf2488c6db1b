#pragma once

// Hybrid longitudinal dynamics: piecewise-constant accelerations between
// sampling instants, velocity jumps at impacts.

#include <functional>
#include <iosfwd>
#include <vector>

#include "ebrake/model.hpp"

namespace ebrake {

/// Lead vehicle schedule: full braking from t = 0 until standstill.
double lead_accel(double t, double v1_0, double cap);

/// Rear vehicle schedule: coasts until tau3, then full braking until standstill.
double rear_accel(double t, double tau3, double v3_0, double cap);

struct PostImpact {
  double v_front;
  double v_rear;
};

/// Momentum-conserving impulse with restitution e. Requires a closing pair,
/// v_rear > v_front; throws std::domain_error otherwise.
PostImpact resolve_collision(double v_front, double v_rear, double m_front,
                             double m_rear, double e);

/// A pair that has already collided and touches again closing slower than
/// this (m/s) settles into resting contact: a plastic merge with no event.
inline constexpr double kRestingSpeed = 1e-3;

struct StepResult {
  SimState state;
  std::vector<CollisionEvent> events;
  double u2_applied = 0.0;
};

struct StepOptions {
  /// Drop the middle vehicle's command from the instant it first collides
  /// (reference strategies brake "until standstill or collision").
  bool release_on_collision = false;
};

/// Advances one sampling period.
///
/// The middle vehicle holds clamp(u2_cmd) over the part of the period at or
/// after tau2 and coasts before it. The lead vehicle brakes at capacity while
/// moving; the rear vehicle does the same from tau3. Within the period the
/// motion is integrated exactly between switching instants (delays,
/// standstill, the v2_max bound, and contacts). A pair that reaches contact
/// while closing receives an impulse at that instant; simultaneous impacts are
/// resolved rear pair first. Touching pairs pressed together at equal speed
/// move as one body. Overlap left at the end of the period is removed by
/// moving the rear vehicle back to contact.
/// Throws std::invalid_argument on a non-finite command.
StepResult step(const SimState& state, double u2_cmd, const ScenarioConfig& scenario,
                const StepOptions& options = {});

/// Command for the middle vehicle given the sampled state.
using Controller = std::function<double(const SimState&, const ScenarioConfig&)>;

/// True when the period starting at `state` reaches tau2, i.e. the middle
/// vehicle's command has any effect on it.
bool control_active(const SimState& state, const ScenarioConfig& scenario);

struct Trajectory {
  std::vector<SimState> states;
  std::vector<double> actions_u2;
  std::vector<CollisionEvent> events;
  int terminated_at = 0;
};

/// Runs until every vehicle has stopped or the horizon is reached. The
/// controller is only consulted for periods where control_active holds.
Trajectory rollout(const ScenarioConfig& scenario, const Controller& controller,
                   const StepOptions& options = {});

/// Columns: step,t,x1,x2,x3,v1,v2,v3,u2,d1,d2. The final state row has an
/// empty u2 field.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const ScenarioConfig& scenario);

}  // namespace ebrake
