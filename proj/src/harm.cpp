#include "ebrake/harm.hpp"

namespace ebrake {

int collision_indicator(double gap) { return gap <= 0.0 ? 1 : 0; }

PairHarm pair_harm(double gap, double v_rel, double m_front, double m_rear) {
  if (!collision_indicator(gap)) return {};
  const double total = m_front + m_rear;
  const double energy = v_rel * v_rel;
  return {m_rear / total * energy, m_front / total * energy};
}

double step_harm(double d1, double v_rel1, double d2, double v_rel2,
                 const std::array<double, 3>& masses) {
  return pair_harm(d1, v_rel1, masses[0], masses[1]).total() +
         pair_harm(d2, v_rel2, masses[1], masses[2]).total();
}

HarmReport accumulate(std::span<const CollisionEvent> events, CountingPolicy policy) {
  HarmReport report;
  std::array<bool, kPairCount> seen{};
  for (const CollisionEvent& event : events) {
    ++report.events_observed;
    const int pair = static_cast<int>(event.pair);
    if (policy == CountingPolicy::kFirstPerPair && seen[pair]) continue;
    seen[pair] = true;
    ++report.events_counted;
    report.per_vehicle[front_vehicle(event.pair)] += event.harm_front;
    report.per_vehicle[rear_vehicle(event.pair)] += event.harm_rear;
  }
  report.total = report.per_vehicle[0] + report.per_vehicle[1] + report.per_vehicle[2];
  return report;
}

}  // namespace ebrake
