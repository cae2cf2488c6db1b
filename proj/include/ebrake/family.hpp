#pragma once

// Randomized scenario families: independent uniform draws for gaps, initial
// speeds and delays around fixed physical parameters.

#include <cstdint>
#include <string>
#include <vector>

#include "ebrake/model.hpp"

namespace ebrake {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ScenarioFamily {
  ScenarioConfig base = ScenarioConfig::reference();  // fixed parameters
  Range d1{5.0, 10.0};
  Range d2{5.0, 10.0};
  Range v1{18.0, 22.0};
  Range v2{18.0, 22.0};
  Range v3{18.0, 22.0};
  Range tau2{0.5, 0.5};
  Range tau3{0.8, 0.8};
  int count = 1000;
  std::uint64_t seed = 1;

  /// "random" and "low-delay" (gaps 5-10 m, speeds 18-22 m/s, delays
  /// 0.5/0.8 s), "high-delay" (delays 1.0/1.5 s), "wide-gap" (gaps 60-80 m).
  static ScenarioFamily preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

std::vector<ValidationError> validate(const ScenarioFamily& family);

/// Scenario `index` of the family under master seed `seed`. Each index owns
/// its own generator, so draws do not depend on evaluation order.
ScenarioConfig sample_scenario(const ScenarioFamily& family, std::uint64_t seed,
                               std::uint64_t index);

std::vector<ScenarioConfig> sample_scenarios(const ScenarioFamily& family, std::uint64_t seed);

inline std::vector<ScenarioConfig> sample_scenarios(const ScenarioFamily& family) {
  return sample_scenarios(family, family.seed);
}

}  // namespace ebrake
