#include "ebrake/model.hpp"

#include <cmath>
#include <sstream>

namespace ebrake {

ScenarioConfig ScenarioConfig::reference() {
  ScenarioConfig config;
  config.vehicles[0] = {4.5, 6.0, 6.0};
  config.vehicles[1] = {5.5, 7.0, 7.0};
  config.vehicles[2] = {5.9, 6.0, 6.0};
  config.v0 = {20.0, 18.0, 20.0};
  return config;
}

namespace {

class Checker {
 public:
  explicit Checker(std::vector<ValidationError>& out) : out_(out) {}

  void finite(const std::string& field, double value) {
    if (!std::isfinite(value)) out_.push_back({field, "must be finite"});
  }
  void positive(const std::string& field, double value, const char* what) {
    if (!(value > 0.0)) out_.push_back({field, what});
  }
  void non_negative(const std::string& field, double value, const char* what) {
    if (!(value >= 0.0)) out_.push_back({field, what});
  }

 private:
  std::vector<ValidationError>& out_;
};

}  // namespace

std::vector<ValidationError> validate(const ScenarioConfig& c) {
  std::vector<ValidationError> errors;
  Checker check(errors);
  for (int i = 0; i < 3; ++i) {
    const std::string id = std::to_string(i + 1);
    const VehicleParams& p = c.vehicles[i];
    check.positive("mass" + id, p.mass, "mass must be positive");
    check.positive("decel_cap" + id, p.decel_cap, "braking capacity must be positive");
    check.non_negative("accel_cap" + id, p.accel_cap,
                       "acceleration capacity must be non-negative");
    check.finite("mass" + id, p.mass);
    check.finite("decel_cap" + id, p.decel_cap);
    check.finite("accel_cap" + id, p.accel_cap);
    check.non_negative("v" + id + "_0", c.v0[i], "initial velocity must be non-negative");
    check.finite("v" + id + "_0", c.v0[i]);
  }
  check.positive("d1_0", c.d1_0, "initial gap must be positive");
  check.positive("d2_0", c.d2_0, "initial gap must be positive");
  check.finite("d1_0", c.d1_0);
  check.finite("d2_0", c.d2_0);
  check.non_negative("tau2", c.tau2, "reaction delay must be non-negative");
  check.non_negative("tau3", c.tau3, "reaction delay must be non-negative");
  check.finite("tau2", c.tau2);
  check.finite("tau3", c.tau3);
  if (!(c.restitution >= 0.0 && c.restitution <= 1.0)) {
    errors.push_back({"restitution", "restitution out of [0,1]"});
  }
  check.positive("v2_max", c.v2_max, "velocity bound must be positive");
  check.finite("v2_max", c.v2_max);
  if (c.v0[1] > c.v2_max) {
    errors.push_back({"v2_0", "initial velocity exceeds v2_max"});
  }
  check.positive("dt", c.dt, "time step must be positive");
  check.finite("dt", c.dt);
  if (c.horizon < 1) errors.push_back({"horizon", "horizon must be at least 1 step"});
  return errors;
}

std::string join_errors(const std::vector<ValidationError>& errors) {
  std::ostringstream out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i) out << "; ";
    out << errors[i].field << ": " << errors[i].message;
  }
  return out.str();
}

SimState initial_state(const ScenarioConfig& config) {
  if (auto errors = validate(config); !errors.empty()) {
    throw ConfigError("invalid scenario: " + join_errors(errors));
  }
  SimState state;
  state.x = {0.0, -config.d1_0, -config.d1_0 - config.d2_0};
  state.v = config.v0;
  return state;
}

}  // namespace ebrake
