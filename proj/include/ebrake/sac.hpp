#pragma once

// Soft actor-critic with twin critics, Polyak targets and automatic entropy
// temperature, on a tanh-squashed Gaussian policy.

#include <cstdint>
#include <vector>

#include "ebrake/networks.hpp"

namespace ebrake {

struct SacConfig {
  int batch_size = 256;
  long buffer_size = 1000000;
  long learning_starts = 10000;
  double tau = 0.02;
  int train_freq = 1;
  int gradient_steps = 1;
  int target_update_interval = 1;
  bool auto_alpha = true;
  double initial_alpha = 1.0;
  double target_entropy = -1.0;
};

struct SacBatch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::VectorXd actions;   // squashed, in [-1, 1]
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_obs;
  Eigen::VectorXd dones;     // 1 at terminal transitions
  Eigen::Index size() const { return actions.size(); }
};

class ReplayBuffer {
 public:
  ReplayBuffer(long capacity, int obs_dim = kObsDim);
  void add(const Observation& obs, double action, double reward, const Observation& next_obs,
           bool done);
  long size() const { return size_; }
  long capacity() const { return capacity_; }
  /// Uniform draws with replacement.
  SacBatch sample(int batch_size, Rng& rng) const;

 private:
  long capacity_;
  long size_ = 0;
  long next_ = 0;
  Eigen::MatrixXd obs_;
  Eigen::MatrixXd next_obs_;
  Eigen::VectorXd actions_;
  Eigen::VectorXd rewards_;
  Eigen::VectorXd dones_;
};

struct SquashedSample {
  Eigen::VectorXd action;    // tanh(mu + sigma * noise)
  Eigen::VectorXd log_prob;  // with the tanh change-of-variables correction
};

SquashedSample squashed_sample(const Eigen::VectorXd& mu, double log_std, const Eigen::VectorXd& noise);

/// Rows: observation, then the action.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::VectorXd& actions);

struct CriticLoss {
  double loss = 0.0;  // 0.5 * sum over critics of the MSE to the soft target
  Eigen::VectorXd target;
  Eigen::VectorXd grad[2];
};

/// next_noise drives the next-state action draws.
CriticLoss sac_critic_loss(const TwinQNetwork& q, const PolicyNetwork& policy, const SacBatch& batch,
                           const Eigen::VectorXd& next_noise, double alpha, double gamma);

struct ActorLoss {
  double loss = 0.0;  // mean(alpha * log_prob - min Q)
  double mean_log_prob = 0.0;
  Eigen::VectorXd grad;  // over PolicyNetwork::flat()
};

ActorLoss sac_actor_loss(const PolicyNetwork& policy, const TwinQNetwork& q, const Eigen::MatrixXd& obs,
                         const Eigen::VectorXd& noise, double alpha);

/// -log_alpha * (mean_log_prob + target_entropy); gradient written to *grad.
double sac_alpha_loss(double log_alpha, double mean_log_prob, double target_entropy, double* grad);

struct SacAgent {
  PolicyNetwork policy;
  TwinQNetwork q;
  double log_alpha = 0.0;
  Adam policy_opt;
  Adam critic_opt[2];
  Adam alpha_opt;
  long updates = 0;

  double alpha() const;
};

SacAgent make_sac_agent(const std::vector<int>& policy_hidden, const std::vector<int>& q_hidden,
                        const SacConfig& config, std::uint64_t seed, int obs_dim = kObsDim);

struct SacStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean log_prob
};

/// One gradient step: temperature, critics, actor, then target averaging.
/// Throws TrainingError on a non-finite loss or gradient.
SacStats sac_update(SacAgent& agent, const SacBatch& batch, const SacConfig& config, double gamma,
                    double lr, Rng& rng);

}  // namespace ebrake
