#pragma once

// Hand-rolled generators and small helpers shared by the test binaries.

#include <cmath>
#include <cstdint>

#include "ebrake/model.hpp"
#include "ebrake/rng.hpp"

namespace ebrake::gen {

inline ScenarioConfig random_scenario(Rng& rng, double gap_lo = 1.0, double gap_hi = 30.0) {
  ScenarioConfig s = ScenarioConfig::reference();
  for (auto& v : s.vehicles) {
    v.mass = rng.uniform(1.0, 10.0);
    v.decel_cap = rng.uniform(3.0, 9.0);
    v.accel_cap = rng.uniform(0.0, 7.0);
  }
  s.v0 = {rng.uniform(0.0, 28.0), rng.uniform(0.0, 28.0), rng.uniform(0.0, 28.0)};
  s.d1_0 = rng.uniform(gap_lo, gap_hi);
  s.d2_0 = rng.uniform(gap_lo, gap_hi);
  s.tau2 = rng.uniform(0.0, 1.5);
  s.tau3 = rng.uniform(0.0, 1.5);
  s.restitution = rng.uniform(0.0, 1.0);
  return s;
}

// Tight scenario around the reference parameters: small gaps and speeds near 20 m/s.
inline ScenarioConfig tight_scenario(Rng& rng) {
  ScenarioConfig s = ScenarioConfig::reference();
  s.d1_0 = rng.uniform(3.0, 10.0);
  s.d2_0 = rng.uniform(3.0, 10.0);
  s.v0 = {rng.uniform(18.0, 22.0), rng.uniform(18.0, 22.0), rng.uniform(18.0, 22.0)};
  return s;
}

inline double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace ebrake::gen
