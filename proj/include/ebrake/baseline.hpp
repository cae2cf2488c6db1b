#pragma once

// Reference braking strategies for the middle vehicle: full braking, and the
// harm-minimizing constant deceleration found by a grid sweep.

#include <optional>
#include <utility>
#include <vector>

#include "ebrake/physics.hpp"

namespace ebrake {

/// Sampling period of the high-resolution baseline sweep.
inline constexpr double kFineDt = 0.005;

/// When a reference strategy stops commanding the brake.
enum class BrakeRelease {
  kStandstill,             // brake whenever moving
  kStandstillOrCollision   // stop braking once the middle vehicle has collided
};

inline constexpr BrakeRelease kDefaultRelease = BrakeRelease::kStandstillOrCollision;

/// Step options that make a release exact within a sampling period.
StepOptions step_options(BrakeRelease release);

/// Full braking from tau2 until standstill (or the first collision of the
/// middle vehicle, under the default release rule).
double non_ethical(const SimState& state, const ScenarioConfig& scenario,
                   BrakeRelease release = kDefaultRelease);

Controller non_ethical_controller(BrakeRelease release = kDefaultRelease);

/// Constant deceleration of magnitude `decel` from tau2, released like
/// non_ethical.
Controller constant_decel_controller(double decel, BrakeRelease release = kDefaultRelease);

/// First-per-pair harm of braking at constant magnitude `decel`, simulated at
/// the scenario's own period.
double constant_decel_harm(double decel, const ScenarioConfig& scenario,
                           BrakeRelease release = kDefaultRelease);

struct BaselineOptions {
  double grid_step = 0.01;     // m/s^2
  std::optional<double> dt;    // overrides the scenario period for the sweep
  int jobs = 1;
  BrakeRelease release = kDefaultRelease;
};

struct BaselineSolution {
  double a_star = 0.0;
  double h_star = 0.0;
  std::optional<std::pair<double, double>> zero_harm_interval;
  std::vector<std::pair<double, double>> curve;  // (decel, harm) per grid point
};

/// Grid {0, d, 2d, ..., cap} (cap always included). Ties resolve to the
/// smallest magnitude; the zero-harm interval is the contiguous zero run that
/// contains a_star.
std::vector<double> decel_grid(double cap, double grid_step);

BaselineSolution solve(const ScenarioConfig& scenario, const BaselineOptions& options = {});

}  // namespace ebrake
