#include <gtest/gtest.h>

#include <sstream>

#include "ebrake/config.hpp"
#include "ebrake/env.hpp"
#include "ebrake/family.hpp"
#include "ebrake/model.hpp"
#include "ebrake/train.hpp"
#include "support.hpp"

using namespace ebrake;

namespace {

bool has_error(const std::vector<ValidationError>& errors, const std::string& message) {
  for (const auto& e : errors) {
    if (e.message == message) return true;
  }
  return false;
}

}  // namespace

TEST(Validate, ReferenceScenarioIsValid) {
  EXPECT_TRUE(validate(ScenarioConfig::reference()).empty());
}

TEST(Validate, RestitutionAboveOneRejected) {
  ScenarioConfig s = ScenarioConfig::reference();
  s.restitution = 1.5;
  EXPECT_TRUE(has_error(validate(s), "restitution out of [0,1]"));
}

TEST(Validate, ZeroGapRejected) {
  ScenarioConfig s = ScenarioConfig::reference();
  s.d1_0 = 0.0;
  EXPECT_TRUE(has_error(validate(s), "initial gap must be positive"));
}

TEST(Validate, NeverThrowsOnGarbage) {
  Rng rng(7);
  for (int k = 0; k < 2000; ++k) {
    ScenarioConfig s = gen::random_scenario(rng);
    const double junk[] = {-1.0, 0.0, NAN, INFINITY, -INFINITY, 1e308};
    s.vehicles[rng.below(3)].mass = junk[rng.below(6)];
    s.d2_0 = junk[rng.below(6)];
    s.dt = junk[rng.below(6)];
    s.restitution = junk[rng.below(6)];
    s.horizon = static_cast<int>(rng.below(3)) - 1;
    EXPECT_NO_THROW((void)validate(s));
    EXPECT_FALSE(validate(s).empty());
  }
}

TEST(InitialState, PlacesFollowersBehindLead) {
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    const ScenarioConfig s = gen::random_scenario(rng);
    ASSERT_TRUE(validate(s).empty());
    const SimState st = initial_state(s);
    EXPECT_EQ(st.x[0], 0.0);
    EXPECT_EQ(st.x[1], st.x[0] - s.d1_0);
    EXPECT_EQ(st.x[2], st.x[1] - s.d2_0);
    EXPECT_EQ(st.v, s.v0);
    EXPECT_EQ(st.n, 0);
  }
}

TEST(InitialState, InvalidScenarioThrows) {
  ScenarioConfig s = ScenarioConfig::reference();
  s.dt = -1.0;
  EXPECT_THROW(initial_state(s), ConfigError);
}

TEST(Config, ParsesCommentsAndWhitespace) {
  std::istringstream in("# header\n  d1_0 = 12.5  # trailing\n\nrestitution=0.5\n");
  ScenarioConfig s = ScenarioConfig::reference();
  load_config(s, in, "inline");
  EXPECT_DOUBLE_EQ(s.d1_0, 12.5);
  EXPECT_DOUBLE_EQ(s.restitution, 0.5);
}

TEST(Config, UnknownKeyNamesTheKey) {
  std::istringstream in("d3_0 = 1\n");
  ScenarioConfig s;
  try {
    load_config(s, in, "inline");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("d3_0"), std::string::npos);
  }
}

TEST(Config, BadNumberRejected) {
  std::istringstream in("d1_0 = seven\n");
  ScenarioConfig s;
  EXPECT_THROW(load_config(s, in, "inline"), ConfigError);
}

TEST(Config, MissingFileReportsNotFound) {
  ScenarioConfig s;
  try {
    load_config_file(s, "/nonexistent/dir/x.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("config not found"), std::string::npos);
  }
}

template <class T>
void expect_round_trip(const T& original) {
  std::istringstream in(dump_config(original));
  T copy{};
  load_config(copy, in, "dump");
  EXPECT_EQ(dump_config(copy), dump_config(original));
}

TEST(Config, DumpRoundTripsEveryKind) {
  Rng rng(11);
  expect_round_trip(gen::random_scenario(rng));
  ScenarioFamily fam = ScenarioFamily::preset("high-delay");
  fam.count = 17;
  fam.seed = 99;
  expect_round_trip(fam);
  RewardWeights w;
  w.k_energy = {0.3, 2.5};
  w.r_safe = 1.0 / 3.0;
  expect_round_trip(w);
  TrainerConfig t;
  t.policy_hidden = {7, 5};
  t.sac.learning_starts = 123;
  t.ppo.clip_epsilon = 0.2;
  expect_round_trip(t);
}

TEST(Config, EveryKeyIsReadable) {
  const ScenarioConfig s = ScenarioConfig::reference();
  for (const auto& key : ConfigSchema<ScenarioConfig>::keys()) {
    EXPECT_NO_THROW((void)ConfigSchema<ScenarioConfig>::get(s, key)) << key;
  }
  const TrainerConfig t;
  for (const auto& key : ConfigSchema<TrainerConfig>::keys()) {
    EXPECT_NO_THROW((void)ConfigSchema<TrainerConfig>::get(t, key)) << key;
  }
}

TEST(Family, DegenerateRangesGiveTheFixedScenario) {
  ScenarioFamily fam;
  fam.d1 = {6.0, 6.0};
  fam.d2 = {8.0, 8.0};
  fam.v1 = fam.v2 = fam.v3 = {19.0, 19.0};
  fam.count = 1;
  const auto list = sample_scenarios(fam);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].d1_0, 6.0);
  EXPECT_EQ(list[0].d2_0, 8.0);
  EXPECT_EQ(list[0].v0[1], 19.0);
}

TEST(Family, TenThousandScenariosAllValidate) {
  ScenarioFamily fam = ScenarioFamily::preset("random");
  fam.count = 10000;
  const auto list = sample_scenarios(fam);
  ASSERT_EQ(list.size(), 10000u);
  for (const auto& s : list) {
    ASSERT_TRUE(validate(s).empty());
    ASSERT_GE(s.d1_0, 5.0);
    ASSERT_LE(s.d1_0, 10.0);
    ASSERT_GE(s.v0[2], 18.0);
    ASSERT_LE(s.v0[2], 22.0);
  }
}

TEST(Family, SameSeedSameList) {
  const ScenarioFamily fam = ScenarioFamily::preset("high-delay");
  const auto a = sample_scenarios(fam, 5);
  const auto b = sample_scenarios(fam, 5);
  const auto c = sample_scenarios(fam, 6);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(dump_config(a[i]), dump_config(b[i]));
    differs = differs || dump_config(a[i]) != dump_config(c[i]);
  }
  EXPECT_TRUE(differs);
}

TEST(Family, PresetsValidateAndUnknownRejected) {
  for (const auto& name : ScenarioFamily::preset_names()) {
    EXPECT_TRUE(validate(ScenarioFamily::preset(name)).empty()) << name;
  }
  EXPECT_THROW(ScenarioFamily::preset("nope"), ConfigError);
}

TEST(Family, InvertedRangeRejected) {
  ScenarioFamily fam;
  fam.d1 = {10.0, 5.0};
  EXPECT_FALSE(validate(fam).empty());
  EXPECT_THROW(sample_scenarios(fam), ConfigError);
}

TEST(RngStreams, DeriveSeedSeparatesStreamsAndIndices) {
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
  EXPECT_EQ(derive_seed(4, 2, 9), derive_seed(4, 2, 9));
}
