#pragma once

// Training loops: on-policy rollouts for PPO, replay for SAC, and a learning
// curve of deterministic evaluation returns.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ebrake/family.hpp"
#include "ebrake/ppo.hpp"
#include "ebrake/sac.hpp"

namespace ebrake {

enum class Algorithm { kPpo, kSac };

const char* to_string(Algorithm algorithm);
/// "ppo" or "sac"; throws ConfigError otherwise.
Algorithm parse_algorithm(const std::string& name);

struct TrainerConfig {
  double gamma = 0.99;
  double learning_rate = 3e-4;
  bool cosine_schedule = true;
  long total_steps = 100000;
  long eval_interval = 2048;  // SAC curve spacing; PPO records once per iteration
  int eval_episodes = 10;
  std::vector<int> policy_hidden{256, 256};
  std::vector<int> value_hidden{256, 256, 128};
  std::vector<int> q_hidden{256, 256};
  PpoConfig ppo;
  SacConfig sac;
};

std::vector<ValidationError> validate(const TrainerConfig& config);

struct CurvePoint {
  long iteration = 0;
  long env_steps = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
};

struct TrainResult {
  PolicyNetwork policy;
  std::vector<CurvePoint> curve;
  long env_steps = 0;
};

using ProgressFn = std::function<void(const CurvePoint&)>;

/// Freshly initialized policy with the architecture train() would use.
PolicyNetwork untrained_policy(Algorithm algorithm, const TrainerConfig& config, std::uint64_t seed);

/// Undiscounted return of one episode under the deterministic action.
double episode_return(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                      const RewardWeights& weights);

/// Episodes draw training scenarios from the family under `seed`; curve points
/// average episode_return over a fixed evaluation set drawn from the same
/// family. Deterministic for a given seed. Throws ConfigError for invalid
/// inputs and TrainingError (with the iteration) when an update fails.
TrainResult train(Algorithm algorithm, const ScenarioFamily& family, const RewardWeights& weights,
                  const TrainerConfig& config, std::uint64_t seed, const ProgressFn& progress = {});

/// Columns: iteration,env_steps,mean_return,std_return.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace ebrake
