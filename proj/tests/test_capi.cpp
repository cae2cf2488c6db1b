#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "ebrake/ebrake.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ebrake_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EBRAKE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string get(const eb_config* c, const char* key) {
  char buf[64];
  size_t needed = 0;
  EXPECT_EQ(eb_config_get(c, key, buf, sizeof buf, &needed), EB_OK);
  return buf;
}

}  // namespace

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_STRNE(eb_version(), "");
  EXPECT_STREQ(eb_status_string(EB_ERR_NOT_FOUND), "not found");
}

TEST(CApi, ConfigSetGetAndValidate) {
  eb_config* c = nullptr;
  ASSERT_EQ(eb_config_new(EB_CONFIG_SCENARIO, nullptr, &c), EB_OK);
  eb_config_kind kind;
  ASSERT_EQ(eb_config_kind_of(c, &kind), EB_OK);
  EXPECT_EQ(kind, EB_CONFIG_SCENARIO);
  EXPECT_EQ(get(c, "d1_0"), "7");
  ASSERT_EQ(eb_config_set(c, "d1_0", "12.5"), EB_OK);
  EXPECT_EQ(get(c, "d1_0"), "12.5");
  EXPECT_EQ(eb_config_set(c, "nope", "1"), EB_ERR_INVALID_CONFIG);
  EXPECT_NE(std::string(eb_last_error()).find("nope"), std::string::npos);
  ASSERT_EQ(eb_config_set(c, "restitution", "1.5"), EB_OK);
  EXPECT_EQ(eb_config_validate(c), EB_ERR_INVALID_CONFIG);
  EXPECT_NE(std::string(eb_last_error()).find("restitution"), std::string::npos);
  size_t needed = 0;
  EXPECT_EQ(eb_config_dump(c, nullptr, 0, &needed), EB_OK);
  EXPECT_GT(needed, 10u);
  char tiny[4];
  EXPECT_EQ(eb_config_dump(c, tiny, sizeof tiny, &needed), EB_ERR_INVALID_ARGUMENT);
  eb_config_free(c);
}

TEST(CApi, ConfigPresetsAndErrors) {
  eb_config* c = nullptr;
  EXPECT_EQ(eb_config_new(EB_CONFIG_FAMILY, "wide-gap", &c), EB_OK);
  EXPECT_EQ(get(c, "d1_0_min"), "60");
  EXPECT_EQ(eb_config_load(c, "/nonexistent/file.cfg"), EB_ERR_NOT_FOUND);
  EXPECT_NE(std::string(eb_last_error()).find("config not found"), std::string::npos);
  eb_config_free(c);
  EXPECT_EQ(eb_config_new(EB_CONFIG_FAMILY, "bogus", &c), EB_ERR_INVALID_CONFIG);
  EXPECT_EQ(eb_config_new(EB_CONFIG_FAMILY, nullptr, nullptr), EB_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ConfigLoadFromFile) {
  const fs::path dir = scratch("load");
  std::ofstream(dir / "s.cfg") << "# tight\nd1_0 = 3\nd2_0 = 4\n";
  eb_config* c = nullptr;
  ASSERT_EQ(eb_config_new(EB_CONFIG_SCENARIO, nullptr, &c), EB_OK);
  ASSERT_EQ(eb_config_load(c, (dir / "s.cfg").c_str()), EB_OK);
  EXPECT_EQ(get(c, "d2_0"), "4");
  std::ofstream(dir / "bad.cfg") << "d1_0 3\n";
  EXPECT_EQ(eb_config_load(c, (dir / "bad.cfg").c_str()), EB_ERR_INVALID_CONFIG);
  eb_config_free(c);
}

TEST(CApi, PolicySaveLoadAct) {
  const fs::path dir = scratch("policy");
  eb_policy* p = nullptr;
  ASSERT_EQ(eb_policy_new_untrained(EB_ALGO_SAC, nullptr, 3, &p), EB_OK);
  double obs[9] = {0.6, 0.6, 0.6, 0.1, 0.1, -0.6, 0, 0, 0};
  double a = 0.0;
  ASSERT_EQ(eb_policy_act(p, obs, 9, &a), EB_OK);
  EXPECT_LE(std::abs(a), 1.0);
  EXPECT_EQ(eb_policy_act(p, obs, 8, &a), EB_ERR_INVALID_ARGUMENT);
  const std::string path = (dir / "p.policy").string();
  ASSERT_EQ(eb_policy_save(p, path.c_str()), EB_OK);
  eb_policy* q = nullptr;
  ASSERT_EQ(eb_policy_load(path.c_str(), &q), EB_OK);
  double b = 0.0;
  eb_policy_act(q, obs, 9, &b);
  EXPECT_EQ(a, b);
  eb_policy_free(p);
  eb_policy_free(q);
  EXPECT_EQ(eb_policy_load((dir / "missing.policy").c_str(), &q), EB_ERR_NOT_FOUND);
  EXPECT_NE(std::string(eb_last_error()).find("missing.policy"), std::string::npos);
  std::ofstream(dir / "junk.policy") << "nothing here\n";
  EXPECT_EQ(eb_policy_load((dir / "junk.policy").c_str(), &q), EB_ERR_IO);
}

TEST(CApi, BaselineSolveWideAndTight) {
  eb_config* c = nullptr;
  ASSERT_EQ(eb_config_new(EB_CONFIG_SCENARIO, nullptr, &c), EB_OK);
  eb_baseline_result tight{};
  ASSERT_EQ(eb_baseline_solve(c, 0.1, 0.0, 1, nullptr, &tight), EB_OK);
  EXPECT_GT(tight.h_star, 0.0);
  EXPECT_EQ(tight.has_interval, 0);
  EXPECT_EQ(tight.grid_points, 71u);
  eb_config_set(c, "d1_0", "80");
  eb_config_set(c, "d2_0", "80");
  eb_baseline_result wide{};
  ASSERT_EQ(eb_baseline_solve(c, 0.1, 0.0, 1, nullptr, &wide), EB_OK);
  EXPECT_EQ(wide.h_star, 0.0);
  EXPECT_EQ(wide.has_interval, 1);
  EXPECT_EQ(wide.interval_hi, 7.0);
  EXPECT_EQ(eb_baseline_solve(c, -1.0, 0.0, 1, nullptr, &wide), EB_ERR_INVALID_ARGUMENT);
  eb_config_free(c);
}

TEST(CApi, EvaluateStrategySet) {
  eb_strategy_set* set = nullptr;
  ASSERT_EQ(eb_strategy_set_new(&set), EB_OK);
  EXPECT_EQ(eb_strategy_set_add(set, EB_STRATEGY_DRL, nullptr, nullptr), EB_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(eb_strategy_set_add(set, EB_STRATEGY_NON_ETHICAL, nullptr, nullptr), EB_OK);
  ASSERT_EQ(eb_strategy_set_add(set, EB_STRATEGY_BASELINE, "e-v2x", nullptr), EB_OK);
  eb_strategy_set_grid_step(set, 0.05);
  eb_config* fam = nullptr;
  eb_config_new(EB_CONFIG_FAMILY, "random", &fam);
  eb_config_set(fam, "count", "12");
  eb_eval_result* r = nullptr;
  ASSERT_EQ(eb_evaluate(set, fam, 2, &r), EB_OK);
  size_t n = 0;
  eb_eval_result_count(r, &n);
  ASSERT_EQ(n, 2u);
  eb_strategy_summary s0{}, s1{};
  eb_eval_result_summary(r, 0, &s0);
  eb_eval_result_summary(r, 1, &s1);
  EXPECT_STREQ(s1.name, "e-v2x");
  EXPECT_EQ(s0.episodes, 12);
  EXPECT_LT(s1.avg_harm, s0.avg_harm);
  EXPECT_EQ(eb_eval_result_summary(r, 2, &s0), EB_ERR_INVALID_ARGUMENT);
  const fs::path dir = scratch("eval");
  EXPECT_EQ(eb_eval_result_write_summary(r, (dir / "s.csv").c_str()), EB_OK);
  EXPECT_EQ(slurp(dir / "s.csv").rfind("strategy,episodes,failed,collisions", 0), 0u);
  EXPECT_EQ(eb_eval_result_write_episodes(r, "/nonexistent/dir/e.csv"), EB_ERR_IO);
  eb_eval_result_free(r);
  eb_config_free(fam);
  eb_strategy_set_free(set);
}

TEST(CApi, HybridAndExports) {
  const fs::path dir = scratch("hybrid");
  eb_policy* p = nullptr;
  eb_policy_new_untrained(EB_ALGO_PPO, nullptr, 1, &p);
  eb_config* fam = nullptr;
  eb_config_new(EB_CONFIG_FAMILY, "random", &fam);
  eb_config_set(fam, "count", "5");
  eb_hybrid_totals t{};
  ASSERT_EQ(eb_run_hybrid(p, fam, 0.1, 1, (dir / "d.csv").c_str(), &t), EB_OK);
  EXPECT_EQ(t.episodes, 5);
  const std::string log = slurp(dir / "d.csv");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 6);

  eb_strategy_set* set = nullptr;
  eb_strategy_set_new(&set);
  eb_strategy_set_add(set, EB_STRATEGY_NON_ETHICAL, nullptr, nullptr);
  eb_strategy_set_add(set, EB_STRATEGY_HYBRID, nullptr, p);
  eb_policy_free(p);  // the set keeps its own reference
  eb_strategy_set_grid_step(set, 0.1);
  eb_config* sc = nullptr;
  eb_config_new(EB_CONFIG_SCENARIO, nullptr, &sc);
  const double d[] = {6.0, 30.0};
  ASSERT_EQ(eb_export_distance_curve(set, sc, d, 2, 3, 1, 1, (dir / "dist.csv").c_str()), EB_OK);
  const std::string dist = slurp(dir / "dist.csv");
  EXPECT_EQ(std::count(dist.begin(), dist.end(), '\n'), 1 + 2 * 2);
  ASSERT_EQ(eb_export_delay_curve(set, sc, nullptr, nullptr, 0, 1, (dir / "delay.csv").c_str()), EB_OK);
  eb_config* s1 = nullptr;
  ASSERT_EQ(eb_config_trajectory_scenario("s1", &s1), EB_OK);
  EXPECT_EQ(get(s1, "d1_0"), "10");
  EXPECT_EQ(eb_config_trajectory_scenario("s9", &s1), EB_ERR_NOT_FOUND);
  ASSERT_EQ(eb_export_trajectory(set, 1, s1, (dir / "traj.csv").c_str()), EB_OK);
  EXPECT_EQ(eb_export_trajectory(set, 2, s1, (dir / "traj.csv").c_str()), EB_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(eb_export_trajectory(set, 0, fam, (dir / "traj.csv").c_str()), EB_ERR_INVALID_ARGUMENT);
  eb_config_free(s1);
  eb_config_free(sc);
  eb_config_free(fam);
  eb_strategy_set_free(set);
}

TEST(Cli, MissingConfigFails) {
  const fs::path dir = scratch("cli_missing");
  EXPECT_NE(run_cli("train --trainer-config " + (dir / "absent.cfg").string() + " --out " + dir.string()), 0);
  const std::string cmd = std::string(EBRAKE_CLI_PATH) + " train --trainer-config " + (dir / "absent.cfg").string() +
                          " --out " + dir.string() + " 2> " + (dir / "err.txt").string();
  EXPECT_NE(std::system(cmd.c_str()), 0);
  EXPECT_NE(slurp(dir / "err.txt").find("config not found"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "train.manifest.json"));
}

TEST(Cli, InvalidOverrideIsUsageError) {
  const fs::path dir = scratch("cli_bad");
  EXPECT_EQ(run_cli("solve-baseline --set scenario.restitution=2 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("solve-baseline --set nosuch.key=2 --out " + dir.string()), 2);
  EXPECT_NE(run_cli("evaluate --strategies drl --out " + dir.string()), 0);
  EXPECT_NE(run_cli("evaluate --strategies hybrid --policy /nonexistent.policy --out " + dir.string()), 0);
}

TEST(Cli, TrainWritesCheckpointCurveAndManifest) {
  const fs::path dir = scratch("cli_train");
  for (const char* algo : {"ppo", "sac"}) {
    ASSERT_EQ(run_cli(std::string("train --quiet --algo ") + algo +
                      " --steps 600 --set trainer.ppo.n_steps=300 --set trainer.sac.learning_starts=300"
                      " --set trainer.sac.batch_size=16 --set trainer.eval_interval=300 --set trainer.eval_episodes=2"
                      " --set trainer.policy_hidden=8,8 --set trainer.value_hidden=8 --set trainer.q_hidden=8"
                      " --seed 1 --out " + dir.string()),
              0)
        << algo;
    EXPECT_TRUE(fs::exists(dir / (std::string(algo) + ".policy")));
    EXPECT_TRUE(fs::exists(dir / (std::string(algo) + "_curve.csv")));
  }
  const std::string manifest = slurp(dir / "train.manifest.json");
  EXPECT_NE(manifest.find("\"tool_version\""), std::string::npos);
  EXPECT_NE(manifest.find("\"resolved_config\""), std::string::npos);
}

TEST(Cli, EvaluateSingleStrategyOneRowAndDeterministic) {
  const fs::path a = scratch("cli_eval_a");
  const fs::path b = scratch("cli_eval_b");
  for (const fs::path& dir : {a, b}) {
    ASSERT_EQ(run_cli("evaluate --strategies baseline --count 6 --grid-step 0.1 --seed 4 --out " + dir.string()), 0);
  }
  const std::string summary = slurp(a / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
  EXPECT_EQ(summary, slurp(b / "summary.csv"));
  EXPECT_EQ(slurp(a / "episodes.csv"), slurp(b / "episodes.csv"));
  EXPECT_TRUE(fs::exists(a / "evaluate.manifest.json"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch("cli_env");
  const std::string cmd = "EBRAKE_OUT_DIR=" + dir.string() + " " + EBRAKE_CLI_PATH +
                          " solve-baseline --grid-step 0.5 --dt 0 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "baseline_curve.csv"));
  EXPECT_TRUE(fs::exists(dir / "solve-baseline.manifest.json"));
}

TEST(Cli, FinerGridNeverWorse) {
  const fs::path dir = scratch("cli_grid");
  ASSERT_EQ(run_cli("solve-baseline --grid-step 0.1 --out " + (dir / "c").string()), 0);
  ASSERT_EQ(run_cli("solve-baseline --grid-step 0.05 --out " + (dir / "f").string()), 0);
  auto h_star = [](const std::string& manifest) {
    const auto pos = manifest.find("\"h_star\": ");
    return std::stod(manifest.substr(pos + 10));
  };
  EXPECT_LE(h_star(slurp(dir / "f" / "solve-baseline.manifest.json")),
            h_star(slurp(dir / "c" / "solve-baseline.manifest.json")));
  const std::string curve = slurp(dir / "f" / "baseline_curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 1 + 141);
}
