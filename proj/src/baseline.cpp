#include "ebrake/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "ebrake/harm.hpp"
#include "ebrake/parallel.hpp"

namespace ebrake {

namespace {

double braking_command(const SimState& state, const ScenarioConfig& scenario, double decel,
                       BrakeRelease release) {
  if (!control_active(state, scenario) || state.v[1] <= 0.0) return 0.0;
  if (release == BrakeRelease::kStandstillOrCollision &&
      (state.pair_collided[0] || state.pair_collided[1])) {
    return 0.0;
  }
  return -decel;
}

}  // namespace

StepOptions step_options(BrakeRelease release) {
  return {release == BrakeRelease::kStandstillOrCollision};
}

double non_ethical(const SimState& state, const ScenarioConfig& scenario, BrakeRelease release) {
  return braking_command(state, scenario, scenario.vehicles[1].decel_cap, release);
}

Controller non_ethical_controller(BrakeRelease release) {
  return [release](const SimState& state, const ScenarioConfig& scenario) {
    return non_ethical(state, scenario, release);
  };
}

Controller constant_decel_controller(double decel, BrakeRelease release) {
  return [decel, release](const SimState& state, const ScenarioConfig& scenario) {
    return braking_command(state, scenario, decel, release);
  };
}

double constant_decel_harm(double decel, const ScenarioConfig& scenario, BrakeRelease release) {
  const Trajectory trajectory = rollout(scenario, constant_decel_controller(decel, release),
                                        step_options(release));
  return accumulate(trajectory.events, CountingPolicy::kFirstPerPair).total;
}

std::vector<double> decel_grid(double cap, double grid_step) {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw std::invalid_argument("baseline grid step must be positive");
  }
  std::vector<double> grid;
  const auto points = static_cast<long>(std::floor(cap / grid_step + 1e-9));
  for (long k = 0; k <= points; ++k) grid.push_back(static_cast<double>(k) * grid_step);
  if (cap - grid.back() > 1e-9 * cap) {
    grid.push_back(cap);
  } else {
    grid.back() = cap;
  }
  return grid;
}

BaselineSolution solve(const ScenarioConfig& scenario, const BaselineOptions& options) {
  ScenarioConfig sweep = scenario;
  if (options.dt) sweep.dt = *options.dt;
  if (options.dt && scenario.dt > 0.0) {
    // Keep the covered time span when resampling.
    sweep.horizon = static_cast<int>(std::ceil(scenario.horizon * scenario.dt / *options.dt - 1e-9));
  }
  if (auto errors = validate(sweep); !errors.empty()) {
    throw ConfigError("invalid scenario: " + join_errors(errors));
  }
  const std::vector<double> grid = decel_grid(sweep.vehicles[1].decel_cap, options.grid_step);
  std::vector<double> harm(grid.size());
  parallel_for(grid.size(), options.jobs,
               [&](std::size_t i) { harm[i] = constant_decel_harm(grid[i], sweep, options.release); });

  BaselineSolution solution;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    solution.curve.emplace_back(grid[i], harm[i]);
    if (harm[i] < harm[best]) best = i;
  }
  solution.a_star = grid[best];
  solution.h_star = harm[best];
  if (solution.h_star == 0.0) {
    std::size_t hi = best;
    while (hi + 1 < grid.size() && harm[hi + 1] == 0.0) ++hi;
    solution.zero_harm_interval = std::make_pair(grid[best], grid[hi]);
  }
  return solution;
}

}  // namespace ebrake
