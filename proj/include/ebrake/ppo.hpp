#pragma once

// Clipped-surrogate policy optimization with generalized advantage estimates.

#include <span>
#include <vector>

#include "ebrake/networks.hpp"

namespace ebrake {

struct PpoConfig {
  int n_steps = 2048;
  int n_epochs = 4;
  int batch_size = 512;
  double clip_epsilon = 0.15;
  double gae_lambda = 0.95;
  double c1 = 0.5;    // value loss weight
  double c2 = 0.005;  // entropy bonus weight
  double target_kl = 0.15;  // <= 0 disables the early stop
  double max_grad_norm = 0.3;
  bool normalize_advantage = true;
};

/// values has one more entry than rewards (the bootstrap value, 0 at a
/// terminal state). Backward recursion over the TD errors.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        double gamma, double lambda);

double ppo_surrogate(double logp_new, double logp_old, double advantage, double epsilon);

double gaussian_log_prob(double x, double mean, double log_std);
double gaussian_entropy(double log_std);

struct PpoBatch {
  Eigen::MatrixXd obs;        // obs_dim x B
  Eigen::VectorXd actions;    // raw (unclipped) samples
  Eigen::VectorXd logp_old;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;    // value targets

  Eigen::Index size() const { return actions.size(); }
  PpoBatch subset(std::span<const Eigen::Index> idx) const;
};

struct PpoLoss {
  double total = 0.0;  // -surrogate + c1 * value_mse - c2 * entropy
  double surrogate = 0.0;
  double value_mse = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  Eigen::VectorXd grad_policy;  // over PolicyNetwork::flat()
  Eigen::VectorXd grad_value;   // over the value body parameters
};

/// Loss and gradients on the batch as given (no advantage normalization).
PpoLoss ppo_loss(const PolicyNetwork& policy, const ValueNetwork& value, const PpoBatch& batch,
                 const PpoConfig& config);

/// Mean of (rho - 1) - log rho over the batch.
double approx_kl(const PolicyNetwork& policy, const PpoBatch& batch);

struct PpoOptimizer {
  Adam policy;
  Adam value;
};

PpoOptimizer make_ppo_optimizer(const PolicyNetwork& policy, const ValueNetwork& value);

struct PpoStats {
  int epochs_completed = 0;
  int minibatch_updates = 0;
  bool early_stop = false;
  double approx_kl = 0.0;  // after the last completed epoch
  double loss = 0.0;       // minibatch means
  double surrogate = 0.0;
  double value_mse = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
};

/// n_epochs passes of shuffled minibatches. The pass loop stops once the
/// approximate KL over the whole batch exceeds target_kl. Throws
/// TrainingError on a non-finite loss or gradient.
PpoStats ppo_update(PolicyNetwork& policy, ValueNetwork& value, PpoOptimizer& optimizer,
                    const PpoBatch& batch, const PpoConfig& config, double lr, Rng& rng);

}  // namespace ebrake
