#include <gtest/gtest.h>

#include "ebrake/harm.hpp"
#include "support.hpp"

using namespace ebrake;

namespace {

CollisionEvent event(Pair pair, int step, double front, double rear) {
  CollisionEvent e;
  e.pair = pair;
  e.step = step;
  e.harm_front = front;
  e.harm_rear = rear;
  return e;
}

}  // namespace

TEST(CollisionIndicator, FiresAtContactAndOverlap) {
  EXPECT_EQ(collision_indicator(0.5), 0);
  EXPECT_EQ(collision_indicator(-0.1), 1);
  EXPECT_EQ(collision_indicator(0.0), 1);
}

TEST(PairHarm, WorkedExample) {
  const PairHarm h = pair_harm(-0.01, 2.0, 5.5, 5.9);
  EXPECT_NEAR(h.front, 2.07018, 1e-5);
  EXPECT_NEAR(h.rear, 1.92982, 1e-5);
  EXPECT_NEAR(h.rear, 5.5 / 11.4 * 4.0, 1e-12);
}

TEST(PairHarm, ApartIsHarmless) {
  const PairHarm h = pair_harm(1.0, 5.0, 3.0, 4.0);
  EXPECT_EQ(h.front, 0.0);
  EXPECT_EQ(h.rear, 0.0);
}

TEST(PairHarm, EqualMassesSplitEvenly) {
  const PairHarm h = pair_harm(0.0, 2.0, 3.0, 3.0);
  EXPECT_DOUBLE_EQ(h.front, 2.0);
  EXPECT_DOUBLE_EQ(h.rear, 2.0);
}

TEST(PairHarm, TouchingWithoutClosingIsHarmless) {
  EXPECT_EQ(pair_harm(0.0, 0.0, 1.0, 2.0).total(), 0.0);
}

TEST(StepHarm, Examples) {
  const std::array<double, 3> m{4.5, 5.5, 5.9};
  EXPECT_EQ(step_harm(1.0, 3.0, 2.0, 4.0, m), 0.0);
  EXPECT_NEAR(step_harm(-0.1, 2.0, 1.0, 9.0, m), 4.0, 1e-12);
  EXPECT_NEAR(step_harm(-0.1, 2.0, -0.2, 3.0, m), 13.0, 1e-12);
}

TEST(Accumulate, CountingRules) {
  const std::vector<CollisionEvent> events{event(Pair::kRear, 3, 2.0, 2.0), event(Pair::kRear, 5, 0.5, 0.5)};
  const HarmReport first = accumulate(events, CountingPolicy::kFirstPerPair);
  EXPECT_DOUBLE_EQ(first.total, 4.0);
  EXPECT_EQ(first.events_counted, 1);
  EXPECT_EQ(first.events_observed, 2);
  EXPECT_DOUBLE_EQ(first.per_vehicle[1], 2.0);
  EXPECT_DOUBLE_EQ(first.per_vehicle[2], 2.0);
  EXPECT_DOUBLE_EQ(accumulate(events, CountingPolicy::kAllEvents).total, 5.0);
  const HarmReport empty = accumulate({}, CountingPolicy::kAllEvents);
  EXPECT_EQ(empty.total, 0.0);
  EXPECT_EQ(empty.events_observed, 0);
}

TEST(HarmProperty, PairSumIdentity) {
  Rng rng(1);
  for (int k = 0; k < 5000; ++k) {
    const double gap = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-30.0, 30.0);
    const PairHarm h = pair_harm(gap, v, rng.uniform(0.5, 10.0), rng.uniform(0.5, 10.0));
    const double expected = v * v * collision_indicator(gap);
    EXPECT_LE(std::abs(h.total() - expected), 1e-12 * std::max(expected, 1.0));
  }
}

TEST(HarmProperty, ShiftInvariant) {
  Rng rng(2);
  const std::array<double, 3> m{4.5, 5.5, 5.9};
  for (int k = 0; k < 1000; ++k) {
    std::array<double, 3> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::array<double, 3> v{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 20)};
    const double shift = rng.uniform(-1e3, 1e3);
    const double dv = rng.uniform(-5, 5);
    const double a = step_harm(x[0] - x[1], v[1] - v[0], x[1] - x[2], v[2] - v[1], m);
    const double b = step_harm((x[0] + shift) - (x[1] + shift), (v[1] + dv) - (v[0] + dv),
                               (x[1] + shift) - (x[2] + shift), (v[2] + dv) - (v[1] + dv), m);
    EXPECT_NEAR(a, b, 1e-9 * std::max(a, 1.0));
  }
}

TEST(HarmProperty, FirstPerPairNeverExceedsAllEvents) {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    std::vector<CollisionEvent> events;
    const int n = static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
      events.push_back(event(rng.below(2) ? Pair::kRear : Pair::kFront, i, rng.uniform(0, 10), rng.uniform(0, 10)));
    }
    EXPECT_LE(accumulate(events, CountingPolicy::kFirstPerPair).total,
              accumulate(events, CountingPolicy::kAllEvents).total);
  }
}
