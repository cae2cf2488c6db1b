#include "ebrake/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ebrake {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        double gamma, double lambda) {
  if (values.size() != rewards.size() + 1) {
    throw std::invalid_argument("gae: values must have one more entry than rewards");
  }
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    const double delta = rewards[k] + gamma * values[k + 1] - values[k];
    running = delta + gamma * lambda * running;
    adv[k] = running;
  }
  return adv;
}

double ppo_surrogate(double logp_new, double logp_old, double advantage, double epsilon) {
  const double ratio = std::exp(logp_new - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double gaussian_log_prob(double x, double mean, double log_std) {
  const double z = (x - mean) / std::exp(log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

double gaussian_entropy(double log_std) { return 0.5 + kHalfLog2Pi + log_std; }

PpoBatch PpoBatch::subset(std::span<const Eigen::Index> idx) const {
  PpoBatch out;
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.obs.resize(obs.rows(), n);
  out.actions.resize(n);
  out.logp_old.resize(n);
  out.advantages.resize(n);
  out.returns.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index i = idx[static_cast<std::size_t>(j)];
    out.obs.col(j) = obs.col(i);
    out.actions(j) = actions(i);
    out.logp_old(j) = logp_old(i);
    out.advantages(j) = advantages(i);
    out.returns(j) = returns(i);
  }
  return out;
}

PpoLoss ppo_loss(const PolicyNetwork& policy, const ValueNetwork& value, const PpoBatch& batch,
                 const PpoConfig& config) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const double log_std = policy.log_std();
  const double var = std::exp(2.0 * log_std);
  const double eps = config.clip_epsilon;

  Mlp::Tape pi_tape;
  const Eigen::MatrixXd mu = policy.body().forward(batch.obs, pi_tape);
  Mlp::Tape v_tape;
  const Eigen::MatrixXd v = value.body().forward(batch.obs, v_tape);

  PpoLoss out;
  Eigen::MatrixXd d_mu(1, n);
  Eigen::MatrixXd d_v(1, n);
  double d_log_std = 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
  double clipped = 0.0;
  double mse = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diff = batch.actions(j) - mu(0, j);
    const double logp = gaussian_log_prob(batch.actions(j), mu(0, j), log_std);
    const double log_ratio = logp - batch.logp_old(j);
    const double ratio = std::exp(log_ratio);
    const double a = batch.advantages(j);
    const double unclipped = ratio * a;
    const double clip_term = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a;
    surrogate += std::min(unclipped, clip_term);
    if (std::abs(ratio - 1.0) > eps) clipped += 1.0;
    kl += (ratio - 1.0) - log_ratio;
    // d(-surrogate)/dlogp, zero on the clipped branch.
    const double g = unclipped <= clip_term ? -a * ratio * inv_n : 0.0;
    d_mu(0, j) = g * diff / var;
    d_log_std += g * (diff * diff / var - 1.0);
    const double err = v(0, j) - batch.returns(j);
    mse += err * err;
    d_v(0, j) = config.c1 * 2.0 * err * inv_n;
  }
  out.surrogate = surrogate * inv_n;
  out.value_mse = mse * inv_n;
  out.entropy = gaussian_entropy(log_std);
  out.approx_kl = kl * inv_n;
  out.clip_fraction = clipped * inv_n;
  out.total = -out.surrogate + config.c1 * out.value_mse - config.c2 * out.entropy;

  d_log_std -= config.c2;
  out.grad_policy = Eigen::VectorXd::Zero(policy.param_count());
  Eigen::VectorXd body_grad = Eigen::VectorXd::Zero(policy.body().param_count());
  policy.body().backward(pi_tape, d_mu, body_grad);
  out.grad_policy.head(body_grad.size()) = body_grad;
  out.grad_policy(body_grad.size()) = policy.log_std_active() ? d_log_std : 0.0;
  out.grad_value = Eigen::VectorXd::Zero(value.body().param_count());
  value.body().backward(v_tape, d_v, out.grad_value);
  return out;
}

double approx_kl(const PolicyNetwork& policy, const PpoBatch& batch) {
  const Eigen::MatrixXd mu = policy.body().forward(batch.obs);
  const double log_std = policy.log_std();
  double kl = 0.0;
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    const double log_ratio = gaussian_log_prob(batch.actions(j), mu(0, j), log_std) - batch.logp_old(j);
    kl += std::expm1(log_ratio) - log_ratio;
  }
  return batch.size() > 0 ? kl / static_cast<double>(batch.size()) : 0.0;
}

PpoOptimizer make_ppo_optimizer(const PolicyNetwork& policy, const ValueNetwork& value) {
  return {Adam(policy.param_count()), Adam(value.body().param_count())};
}

PpoStats ppo_update(PolicyNetwork& policy, ValueNetwork& value, PpoOptimizer& optimizer,
                    const PpoBatch& batch, const PpoConfig& config, double lr, Rng& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty batch");
  PpoBatch data = batch;
  if (config.normalize_advantage && n > 1) {
    const double mean = data.advantages.mean();
    const double sd = std::sqrt((data.advantages.array() - mean).square().sum() / static_cast<double>(n - 1));
    data.advantages = (data.advantages.array() - mean) / (sd + 1e-8);
  }
  const Eigen::Index mb = std::clamp<Eigen::Index>(config.batch_size, 1, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));

  PpoStats stats;
  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index len = std::min(mb, n - start);
      const PpoBatch minibatch =
          data.subset(std::span<const Eigen::Index>(order).subspan(static_cast<std::size_t>(start),
                                                                   static_cast<std::size_t>(len)));
      PpoLoss loss = ppo_loss(policy, value, minibatch, config);
      if (!std::isfinite(loss.total) || !finite(loss.grad_policy) || !finite(loss.grad_value)) {
        throw TrainingError("ppo_update: non-finite loss or gradient");
      }
      stats.grad_norm += clip_global_norm({&loss.grad_policy, &loss.grad_value}, config.max_grad_norm);
      Eigen::VectorXd theta = policy.flat();
      optimizer.policy.step(theta, loss.grad_policy, lr);
      policy.set_flat(theta);
      optimizer.value.step(value.body().params(), loss.grad_value, lr);
      ++stats.minibatch_updates;
      stats.loss += loss.total;
      stats.surrogate += loss.surrogate;
      stats.value_mse += loss.value_mse;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
    }
    ++stats.epochs_completed;
    stats.approx_kl = approx_kl(policy, data);
    if (config.target_kl > 0.0 && stats.approx_kl > config.target_kl) {
      stats.early_stop = stats.epochs_completed < config.n_epochs;
      break;
    }
  }
  if (stats.minibatch_updates > 0) {
    const double k = 1.0 / stats.minibatch_updates;
    stats.loss *= k;
    stats.surrogate *= k;
    stats.value_mse *= k;
    stats.entropy *= k;
    stats.clip_fraction *= k;
    stats.grad_norm *= k;
  }
  return stats;
}

}  // namespace ebrake
