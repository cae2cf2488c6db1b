#pragma once

// Shared domain types for the three-vehicle emergency braking model.
//
// Vehicles are indexed 0 (lead), 1 (middle, controlled), 2 (rear). Gaps are
// bumper-to-bumper distances, d1 = x[0] - x[1] and d2 = x[1] - x[2]. All
// quantities are SI except masses, which are tonnes; masses only ever appear in
// ratios, so the unit cancels.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebrake {

struct VehicleParams {
  double mass = 1.0;       // t, > 0
  double decel_cap = 1.0;  // braking capacity a_l^max, m/s^2, > 0
  double accel_cap = 0.0;  // a_u^max, m/s^2, >= 0
};

enum class Pair { kFront = 0, kRear = 1 };

inline constexpr int kPairCount = 2;

inline const char* to_string(Pair pair) {
  return pair == Pair::kFront ? "front" : "rear";
}

/// Index of the front and rear vehicle of a pair.
inline constexpr int front_vehicle(Pair pair) { return static_cast<int>(pair); }
inline constexpr int rear_vehicle(Pair pair) { return static_cast<int>(pair) + 1; }

struct ScenarioConfig {
  std::array<VehicleParams, 3> vehicles{};
  std::array<double, 3> v0{};  // m/s
  double d1_0 = 7.0;           // m
  double d2_0 = 7.0;           // m
  double tau2 = 0.5;           // s, middle vehicle reaction delay
  double tau3 = 0.8;           // s, rear vehicle reaction delay
  double restitution = 0.3;
  double v2_max = 30.0;        // m/s
  double dt = 0.05;            // s
  int horizon = 240;           // steps

  /// Parameters of the reference experiment: v = (20, 18, 20) m/s,
  /// delays 0.5/0.8 s, caps 6/7/6 m/s^2, masses 4.5/5.5/5.9 t, gaps 7/7 m.
  static ScenarioConfig reference();
};

struct ValidationError {
  std::string field;
  std::string message;
};

/// Reports every violated invariant. Never throws.
std::vector<ValidationError> validate(const ScenarioConfig& config);

std::string join_errors(const std::vector<ValidationError>& errors);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimState {
  std::array<double, 3> x{};
  std::array<double, 3> v{};
  int n = 0;
  std::array<bool, kPairCount> pair_collided{};
  double last_u2 = 0.0;

  double gap(Pair pair) const {
    return x[front_vehicle(pair)] - x[rear_vehicle(pair)];
  }
  /// Closing speed of a pair, v_rear - v_front (positive when closing).
  double closing_speed(Pair pair) const {
    return v[rear_vehicle(pair)] - v[front_vehicle(pair)];
  }
  bool stopped() const { return v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0; }
};

/// Lead vehicle at the origin, followers placed behind it by the initial gaps.
/// Throws ConfigError when the scenario does not validate.
SimState initial_state(const ScenarioConfig& config);

inline double time_at(const SimState& state, const ScenarioConfig& config) {
  return state.n * config.dt;
}

struct CollisionEvent {
  Pair pair = Pair::kFront;
  int step = 0;
  double v_rel_pre = 0.0;   // closing speed before impact, > 0
  double v_rel_post = 0.0;  // = -e * v_rel_pre
  double harm_front = 0.0;
  double harm_rear = 0.0;
  // Velocities around the impulse, kept for conservation checks.
  double v_front_pre = 0.0;
  double v_rear_pre = 0.0;
  double v_front_post = 0.0;
  double v_rear_post = 0.0;
};

}  // namespace ebrake
