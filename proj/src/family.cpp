#include "ebrake/family.hpp"

#include <cmath>

#include "ebrake/rng.hpp"

namespace ebrake {

ScenarioFamily ScenarioFamily::preset(const std::string& name) {
  ScenarioFamily family;
  if (name == "random" || name == "low-delay") return family;
  if (name == "high-delay") {
    family.tau2 = {1.0, 1.0};
    family.tau3 = {1.5, 1.5};
    return family;
  }
  if (name == "wide-gap") {
    family.d1 = {60.0, 80.0};
    family.d2 = {60.0, 80.0};
    return family;
  }
  throw ConfigError("unknown scenario family '" + name + "'");
}

std::vector<std::string> ScenarioFamily::preset_names() {
  return {"random", "low-delay", "high-delay", "wide-gap"};
}

std::vector<ValidationError> validate(const ScenarioFamily& family) {
  std::vector<ValidationError> errors;
  auto check = [&](const char* field, Range r, double floor, bool strict) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      errors.push_back({field, "range must be finite with min <= max"});
    } else if (strict ? r.lo <= floor : r.lo < floor) {
      errors.push_back({field, strict ? "range must be positive" : "range must be non-negative"});
    }
  };
  check("d1", family.d1, 0.0, true);
  check("d2", family.d2, 0.0, true);
  check("v1", family.v1, 0.0, false);
  check("v2", family.v2, 0.0, false);
  check("v3", family.v3, 0.0, false);
  check("tau2", family.tau2, 0.0, false);
  check("tau3", family.tau3, 0.0, false);
  if (family.v2.hi > family.base.v2_max) {
    errors.push_back({"v2_max", "v2 range exceeds v2_max"});
  }
  if (family.count < 1) errors.push_back({"count", "count must be >= 1"});
  // Validate the fixed parameters with the sampled fields at their lower ends.
  ScenarioConfig probe = family.base;
  probe.d1_0 = std::max(family.d1.lo, 1.0);
  probe.d2_0 = std::max(family.d2.lo, 1.0);
  probe.v0 = {0.0, 0.0, 0.0};
  probe.tau2 = probe.tau3 = 0.0;
  for (auto& e : validate(probe)) errors.push_back(e);
  return errors;
}

ScenarioConfig sample_scenario(const ScenarioFamily& family, std::uint64_t seed,
                               std::uint64_t index) {
  Rng rng(derive_seed(seed, streams::kScenario, index));
  ScenarioConfig s = family.base;
  s.d1_0 = rng.uniform(family.d1.lo, family.d1.hi);
  s.d2_0 = rng.uniform(family.d2.lo, family.d2.hi);
  s.v0[0] = rng.uniform(family.v1.lo, family.v1.hi);
  s.v0[1] = rng.uniform(family.v2.lo, family.v2.hi);
  s.v0[2] = rng.uniform(family.v3.lo, family.v3.hi);
  s.tau2 = rng.uniform(family.tau2.lo, family.tau2.hi);
  s.tau3 = rng.uniform(family.tau3.lo, family.tau3.hi);
  return s;
}

std::vector<ScenarioConfig> sample_scenarios(const ScenarioFamily& family, std::uint64_t seed) {
  if (auto errors = validate(family); !errors.empty()) {
    throw ConfigError("invalid scenario family: " + join_errors(errors));
  }
  std::vector<ScenarioConfig> out;
  out.reserve(static_cast<std::size_t>(family.count));
  for (int i = 0; i < family.count; ++i) {
    out.push_back(sample_scenario(family, seed, static_cast<std::uint64_t>(i)));
  }
  return out;
}

}  // namespace ebrake
