#pragma once

// Collision harm: the closing speed squared, split between the two vehicles of
// a pair in proportion to the other vehicle's mass share.

#include <array>
#include <span>

#include "ebrake/model.hpp"

namespace ebrake {

/// 1 when the gap is closed (d <= 0), else 0.
int collision_indicator(double gap);

struct PairHarm {
  double front = 0.0;
  double rear = 0.0;
  double total() const { return front + rear; }
};

PairHarm pair_harm(double gap, double v_rel, double m_front, double m_rear);

/// Sum of the four per-vehicle harm terms of one sampling instant.
double step_harm(double d1, double v_rel1, double d2, double v_rel2,
                 const std::array<double, 3>& masses);

enum class CountingPolicy {
  kAllEvents,    // every impact contributes (reward signal)
  kFirstPerPair  // only the earliest impact of each pair (evaluation protocol)
};

struct HarmReport {
  std::array<double, 3> per_vehicle{};
  double total = 0.0;
  int events_counted = 0;
  int events_observed = 0;
};

HarmReport accumulate(std::span<const CollisionEvent> events, CountingPolicy policy);

}  // namespace ebrake
