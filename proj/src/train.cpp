#include "ebrake/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ebrake/format.hpp"

namespace ebrake {

namespace {

class ScenarioStream {
 public:
  ScenarioStream(const ScenarioFamily& family, std::uint64_t seed)
      : family_(family), seed_(derive_seed(seed, streams::kScenario)) {}

  /// Starts the next episode whose decision phase is not empty.
  Observation reset(BrakingEnv& env) {
    for (;;) {
      Observation obs = env.reset(sample_scenario(family_, seed_, next_++));
      if (!env.done()) return obs;
    }
  }

 private:
  const ScenarioFamily& family_;
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

class Evaluator {
 public:
  Evaluator(const ScenarioFamily& family, const RewardWeights& weights, int episodes, std::uint64_t seed)
      : weights_(weights) {
    const std::uint64_t eval_seed = derive_seed(seed, streams::kEval);
    for (int j = 0; j < episodes; ++j) {
      scenarios_.push_back(sample_scenario(family, eval_seed, static_cast<std::uint64_t>(j)));
    }
  }

  CurvePoint point(const PolicyNetwork& policy, long iteration, long steps) const {
    CurvePoint p;
    p.iteration = iteration;
    p.env_steps = steps;
    if (scenarios_.empty()) return p;
    std::vector<double> returns;
    for (const auto& s : scenarios_) returns.push_back(episode_return(policy, s, weights_));
    double sum = 0.0;
    for (double r : returns) sum += r;
    p.mean_return = sum / static_cast<double>(returns.size());
    double sq = 0.0;
    for (double r : returns) sq += (r - p.mean_return) * (r - p.mean_return);
    p.std_return = std::sqrt(sq / static_cast<double>(returns.size()));
    return p;
  }

 private:
  RewardWeights weights_;
  std::vector<ScenarioConfig> scenarios_;
};

double learning_rate(const TrainerConfig& config, long steps_done) {
  if (!config.cosine_schedule || config.total_steps <= 0) return config.learning_rate;
  return cosine_lr(config.learning_rate,
                   static_cast<double>(steps_done) / static_cast<double>(config.total_steps));
}

void check_inputs(const ScenarioFamily& family, const RewardWeights& weights, const TrainerConfig& config) {
  std::vector<ValidationError> errors = validate(family);
  for (auto& e : validate(weights)) errors.push_back(e);
  for (auto& e : validate(config)) errors.push_back(e);
  if (!errors.empty()) throw ConfigError("invalid training configuration: " + join_errors(errors));
}

TrainResult train_ppo(const ScenarioFamily& family, const RewardWeights& weights,
                      const TrainerConfig& config, std::uint64_t seed, const ProgressFn& progress) {
  const PpoConfig& pc = config.ppo;
  TrainResult result;
  result.policy = untrained_policy(Algorithm::kPpo, config, seed);
  ValueNetwork value(config.value_hidden);
  value.init(seed);
  PpoOptimizer optimizer = make_ppo_optimizer(result.policy, value);
  Rng explore(derive_seed(seed, streams::kExplore));
  Rng shuffle(derive_seed(seed, streams::kMinibatch));
  const Evaluator evaluator(family, weights, config.eval_episodes, seed);
  ScenarioStream scenarios(family, seed);
  BrakingEnv env(weights);
  if (config.total_steps <= 0) return result;
  Observation obs = scenarios.reset(env);

  long steps = 0;
  long iteration = 0;
  while (steps < config.total_steps) {
    const long n = std::min<long>(pc.n_steps, config.total_steps - steps);
    const double lr = learning_rate(config, steps);
    std::vector<Observation> observations;
    std::vector<double> actions, logps, rewards, values;
    std::vector<bool> dones;
    const double log_std = result.policy.log_std();
    const double sigma = std::exp(log_std);
    for (long t = 0; t < n; ++t) {
      const double mu = result.policy.mean(obs);
      const double u = mu + sigma * explore.normal();
      observations.push_back(obs);
      actions.push_back(u);
      logps.push_back(gaussian_log_prob(u, mu, log_std));
      values.push_back(value.value(obs));
      EnvStep s = env.step(u);
      rewards.push_back(s.reward);
      dones.push_back(s.done);
      obs = s.done ? scenarios.reset(env) : s.obs;
    }
    steps += n;

    // Advantages per episode segment; an unfinished tail bootstraps from V.
    std::vector<double> adv(static_cast<std::size_t>(n));
    std::size_t begin = 0;
    for (std::size_t t = 0; t < static_cast<std::size_t>(n); ++t) {
      const bool last = t + 1 == static_cast<std::size_t>(n);
      if (!dones[t] && !last) continue;
      std::vector<double> seg_values(values.begin() + static_cast<long>(begin),
                                     values.begin() + static_cast<long>(t) + 1);
      seg_values.push_back(dones[t] ? 0.0 : value.value(obs));
      const std::vector<double> seg = gae(
          std::span<const double>(rewards).subspan(begin, t + 1 - begin), seg_values, config.gamma,
          pc.gae_lambda);
      std::copy(seg.begin(), seg.end(), adv.begin() + static_cast<long>(begin));
      begin = t + 1;
    }

    PpoBatch batch;
    batch.obs = stack(observations);
    batch.actions = Eigen::Map<const Eigen::VectorXd>(actions.data(), n);
    batch.logp_old = Eigen::Map<const Eigen::VectorXd>(logps.data(), n);
    batch.advantages = Eigen::Map<const Eigen::VectorXd>(adv.data(), n);
    batch.returns = batch.advantages + Eigen::Map<const Eigen::VectorXd>(values.data(), n);
    try {
      ppo_update(result.policy, value, optimizer, batch, pc, lr, shuffle);
    } catch (const TrainingError& e) {
      throw TrainingError("iteration " + std::to_string(iteration + 1) + ": " + e.what());
    }
    ++iteration;
    result.curve.push_back(evaluator.point(result.policy, iteration, steps));
    if (progress) progress(result.curve.back());
  }
  result.env_steps = steps;
  return result;
}

TrainResult train_sac(const ScenarioFamily& family, const RewardWeights& weights,
                      const TrainerConfig& config, std::uint64_t seed, const ProgressFn& progress) {
  const SacConfig& sc = config.sac;
  SacAgent agent = make_sac_agent(config.policy_hidden, config.q_hidden, sc, seed);
  TrainResult result;
  if (config.total_steps <= 0) {
    result.policy = agent.policy;
    return result;
  }
  ReplayBuffer buffer(std::min(sc.buffer_size, config.total_steps));
  Rng explore(derive_seed(seed, streams::kExplore));
  Rng replay(derive_seed(seed, streams::kMinibatch));
  const Evaluator evaluator(family, weights, config.eval_episodes, seed);
  ScenarioStream scenarios(family, seed);
  BrakingEnv env(weights);
  Observation obs = scenarios.reset(env);

  long iteration = 0;
  for (long t = 0; t < config.total_steps; ++t) {
    double action;
    if (t < sc.learning_starts) {
      action = explore.uniform(-1.0, 1.0);
    } else {
      const double u = agent.policy.mean(obs) + std::exp(agent.policy.log_std()) * explore.normal();
      action = std::tanh(u);
    }
    EnvStep s = env.step(action);
    buffer.add(obs, action, s.reward, s.obs, s.done);
    obs = s.done ? scenarios.reset(env) : s.obs;

    const long done_steps = t + 1;
    if (done_steps >= sc.learning_starts && done_steps % sc.train_freq == 0) {
      const double lr = learning_rate(config, t);
      for (int g = 0; g < sc.gradient_steps; ++g) {
        const SacBatch batch = buffer.sample(sc.batch_size, replay);
        try {
          sac_update(agent, batch, sc, config.gamma, lr, replay);
        } catch (const TrainingError& e) {
          throw TrainingError("iteration " + std::to_string(iteration + 1) + ": " + e.what());
        }
      }
    }
    if (done_steps % config.eval_interval == 0 || done_steps == config.total_steps) {
      ++iteration;
      result.curve.push_back(evaluator.point(agent.policy, iteration, done_steps));
      if (progress) progress(result.curve.back());
    }
  }
  result.policy = agent.policy;
  result.env_steps = config.total_steps;
  return result;
}

bool valid_layers(const std::vector<int>& hidden) {
  return !hidden.empty() && std::all_of(hidden.begin(), hidden.end(), [](int w) { return w > 0; });
}

}  // namespace

const char* to_string(Algorithm algorithm) { return algorithm == Algorithm::kPpo ? "ppo" : "sac"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "ppo") return Algorithm::kPpo;
  if (name == "sac") return Algorithm::kSac;
  throw ConfigError("unknown algorithm '" + name + "' (expected ppo or sac)");
}

std::vector<ValidationError> validate(const TrainerConfig& c) {
  std::vector<ValidationError> errors;
  auto require = [&](bool ok, const char* field, const char* message) {
    if (!ok) errors.push_back({field, message});
  };
  require(c.gamma >= 0.0 && c.gamma <= 1.0, "gamma", "must be in [0,1]");
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "learning_rate", "must be > 0");
  require(c.total_steps >= 0, "total_steps", "must be >= 0");
  require(c.eval_interval >= 1, "eval_interval", "must be >= 1");
  require(c.eval_episodes >= 0, "eval_episodes", "must be >= 0");
  require(valid_layers(c.policy_hidden), "policy_hidden", "needs at least one positive width");
  require(valid_layers(c.value_hidden), "value_hidden", "needs at least one positive width");
  require(valid_layers(c.q_hidden), "q_hidden", "needs at least one positive width");
  require(c.ppo.n_steps >= 1, "ppo.n_steps", "must be >= 1");
  require(c.ppo.n_epochs >= 1, "ppo.n_epochs", "must be >= 1");
  require(c.ppo.batch_size >= 1, "ppo.batch_size", "must be >= 1");
  require(c.ppo.clip_epsilon > 0.0 && c.ppo.clip_epsilon < 1.0, "ppo.clip_epsilon", "must be in (0,1)");
  require(c.ppo.gae_lambda >= 0.0 && c.ppo.gae_lambda <= 1.0, "ppo.gae_lambda", "must be in [0,1]");
  require(c.ppo.c1 >= 0.0, "ppo.c1", "must be >= 0");
  require(c.ppo.c2 >= 0.0, "ppo.c2", "must be >= 0");
  require(c.ppo.max_grad_norm > 0.0, "ppo.max_grad_norm", "must be > 0");
  require(c.sac.batch_size >= 1, "sac.batch_size", "must be >= 1");
  require(c.sac.buffer_size >= 1, "sac.buffer_size", "must be >= 1");
  require(c.sac.learning_starts >= 1, "sac.learning_starts", "must be >= 1");
  require(c.sac.tau > 0.0 && c.sac.tau <= 1.0, "sac.tau", "must be in (0,1]");
  require(c.sac.train_freq >= 1, "sac.train_freq", "must be >= 1");
  require(c.sac.gradient_steps >= 1, "sac.gradient_steps", "must be >= 1");
  require(c.sac.target_update_interval >= 1, "sac.target_update_interval", "must be >= 1");
  require(c.sac.initial_alpha > 0.0, "sac.initial_alpha", "must be > 0");
  return errors;
}

PolicyNetwork untrained_policy(Algorithm algorithm, const TrainerConfig& config, std::uint64_t seed) {
  PolicyNetwork policy(algorithm == Algorithm::kPpo ? PolicyHead::kGaussian : PolicyHead::kTanhGaussian,
                       config.policy_hidden);
  policy.init(seed);
  return policy;
}

double episode_return(const PolicyNetwork& policy, const ScenarioConfig& scenario,
                      const RewardWeights& weights) {
  BrakingEnv env(weights);
  Observation obs = env.reset(scenario);
  double total = 0.0;
  while (!env.done()) {
    EnvStep s = env.step(policy.act(obs));
    total += s.reward;
    obs = s.obs;
  }
  return total;
}

TrainResult train(Algorithm algorithm, const ScenarioFamily& family, const RewardWeights& weights,
                  const TrainerConfig& config, std::uint64_t seed, const ProgressFn& progress) {
  check_inputs(family, weights, config);
  return algorithm == Algorithm::kPpo ? train_ppo(family, weights, config, seed, progress)
                                      : train_sac(family, weights, config, seed, progress);
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "iteration,env_steps,mean_return,std_return\n";
  for (const auto& p : curve) {
    out << p.iteration << ',' << p.env_steps << ',' << csv_number(p.mean_return) << ','
        << csv_number(p.std_return) << '\n';
  }
}

}  // namespace ebrake
