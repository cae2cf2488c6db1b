#include "ebrake/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebrake {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
constexpr double kSquashEps = 1e-6;

Eigen::VectorXd normals(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = rng.normal();
  return out;
}

void require_finite(double value, const Eigen::VectorXd& grad, const char* what) {
  if (!std::isfinite(value) || !grad.allFinite()) {
    throw TrainingError(std::string("sac_update: non-finite ") + what);
  }
}

}  // namespace

namespace {

long checked_capacity(long capacity) {
  if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be at least 1");
  return capacity;
}

}  // namespace

ReplayBuffer::ReplayBuffer(long capacity, int obs_dim)
    : capacity_(checked_capacity(capacity)),
      obs_(obs_dim, capacity_),
      next_obs_(obs_dim, capacity_),
      actions_(capacity_),
      rewards_(capacity_),
      dones_(capacity_) {}

void ReplayBuffer::add(const Observation& obs, double action, double reward,
                       const Observation& next_obs, bool done) {
  obs_.col(next_) = to_vector(obs);
  next_obs_.col(next_) = to_vector(next_obs);
  actions_(next_) = action;
  rewards_(next_) = reward;
  dones_(next_) = done ? 1.0 : 0.0;
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

SacBatch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample on an empty buffer");
  SacBatch b;
  b.obs.resize(obs_.rows(), batch_size);
  b.next_obs.resize(obs_.rows(), batch_size);
  b.actions.resize(batch_size);
  b.rewards.resize(batch_size);
  b.dones.resize(batch_size);
  for (int j = 0; j < batch_size; ++j) {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(size_)));
    b.obs.col(j) = obs_.col(i);
    b.next_obs.col(j) = next_obs_.col(i);
    b.actions(j) = actions_(i);
    b.rewards(j) = rewards_(i);
    b.dones(j) = dones_(i);
  }
  return b;
}

SquashedSample squashed_sample(const Eigen::VectorXd& mu, double log_std, const Eigen::VectorXd& noise) {
  const double sigma = std::exp(log_std);
  SquashedSample s;
  s.action.resize(mu.size());
  s.log_prob.resize(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double a = std::tanh(mu(i) + sigma * noise(i));
    s.action(i) = a;
    s.log_prob(i) = -0.5 * noise(i) * noise(i) - log_std - kHalfLog2Pi -
                    std::log(1.0 - a * a + kSquashEps);
  }
  return s;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::VectorXd& actions) {
  Eigen::MatrixXd x(obs.rows() + 1, obs.cols());
  x.topRows(obs.rows()) = obs;
  x.row(obs.rows()) = actions.transpose();
  return x;
}

CriticLoss sac_critic_loss(const TwinQNetwork& q, const PolicyNetwork& policy, const SacBatch& batch,
                           const Eigen::VectorXd& next_noise, double alpha, double gamma) {
  const Eigen::Index n = batch.size();
  const Eigen::VectorXd next_mu = policy.body().forward(batch.next_obs).row(0).transpose();
  const SquashedSample next = squashed_sample(next_mu, policy.log_std(), next_noise);
  const Eigen::MatrixXd next_in = critic_input(batch.next_obs, next.action);
  const Eigen::MatrixXd t1 = q.target(0).forward(next_in);
  const Eigen::MatrixXd t2 = q.target(1).forward(next_in);

  CriticLoss out;
  out.target.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double soft = std::min(t1(0, j), t2(0, j)) - alpha * next.log_prob(j);
    out.target(j) = batch.rewards(j) + (1.0 - batch.dones(j)) * gamma * soft;
  }
  const Eigen::MatrixXd in = critic_input(batch.obs, batch.actions);
  for (int k = 0; k < 2; ++k) {
    Mlp::Tape tape;
    const Eigen::MatrixXd qk = q.critic(k).forward(in, tape);
    const Eigen::MatrixXd err = qk - out.target.transpose();
    out.loss += 0.5 * err.squaredNorm() / static_cast<double>(n);
    out.grad[k] = Eigen::VectorXd::Zero(q.critic(k).param_count());
    q.critic(k).backward(tape, err / static_cast<double>(n), out.grad[k]);
  }
  return out;
}

ActorLoss sac_actor_loss(const PolicyNetwork& policy, const TwinQNetwork& q, const Eigen::MatrixXd& obs,
                         const Eigen::VectorXd& noise, double alpha) {
  const Eigen::Index n = obs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double log_std = policy.log_std();
  const double sigma = std::exp(log_std);
  Mlp::Tape pi_tape;
  const Eigen::VectorXd mu = policy.body().forward(obs, pi_tape).row(0).transpose();
  const SquashedSample s = squashed_sample(mu, log_std, noise);

  const Eigen::MatrixXd in = critic_input(obs, s.action);
  Mlp::Tape tapes[2];
  const Eigen::MatrixXd q1 = q.critic(0).forward(in, tapes[0]);
  const Eigen::MatrixXd q2 = q.critic(1).forward(in, tapes[1]);

  ActorLoss out;
  Eigen::MatrixXd seed[2] = {Eigen::MatrixXd::Zero(1, n), Eigen::MatrixXd::Zero(1, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool first = q1(0, j) <= q2(0, j);
    const double min_q = first ? q1(0, j) : q2(0, j);
    out.loss += alpha * s.log_prob(j) - min_q;
    out.mean_log_prob += s.log_prob(j);
    seed[first ? 0 : 1](0, j) = -inv_n;
  }
  out.loss *= inv_n;
  out.mean_log_prob *= inv_n;

  // dL/da through the selected critic of each sample.
  Eigen::VectorXd d_action = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd d_in = q.critic(k).backward_input(tapes[k], seed[k]);
    d_action += d_in.row(d_in.rows() - 1).transpose();
  }
  Eigen::MatrixXd d_mu(1, n);
  double d_log_std = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a = s.action(j);
    const double one_minus = 1.0 - a * a;
    const double g_u = 2.0 * a * one_minus / (one_minus + kSquashEps);  // dlogp/du
    const double d_u = d_action(j) * one_minus + alpha * inv_n * g_u;
    d_mu(0, j) = d_u;
    d_log_std += -alpha * inv_n + d_u * sigma * noise(j);
  }
  Eigen::VectorXd body_grad = Eigen::VectorXd::Zero(policy.body().param_count());
  policy.body().backward(pi_tape, d_mu, body_grad);
  out.grad = Eigen::VectorXd::Zero(policy.param_count());
  out.grad.head(body_grad.size()) = body_grad;
  out.grad(body_grad.size()) = policy.log_std_active() ? d_log_std : 0.0;
  return out;
}

double sac_alpha_loss(double log_alpha, double mean_log_prob, double target_entropy, double* grad) {
  const double c = mean_log_prob + target_entropy;
  if (grad) *grad = -c;
  return -log_alpha * c;
}

double SacAgent::alpha() const { return std::exp(log_alpha); }

SacAgent make_sac_agent(const std::vector<int>& policy_hidden, const std::vector<int>& q_hidden,
                        const SacConfig& config, std::uint64_t seed, int obs_dim) {
  SacAgent agent;
  agent.policy = PolicyNetwork(PolicyHead::kTanhGaussian, policy_hidden, obs_dim);
  agent.policy.init(seed);
  agent.q = TwinQNetwork(q_hidden, obs_dim);
  agent.q.init(seed);
  agent.log_alpha = std::log(config.initial_alpha);
  agent.policy_opt = Adam(agent.policy.param_count());
  for (int k = 0; k < 2; ++k) agent.critic_opt[k] = Adam(agent.q.critic(k).param_count());
  agent.alpha_opt = Adam(1);
  return agent;
}

SacStats sac_update(SacAgent& agent, const SacBatch& batch, const SacConfig& config, double gamma,
                    double lr, Rng& rng) {
  const Eigen::Index n = batch.size();
  SacStats stats;
  const Eigen::VectorXd noise = normals(n, rng);
  const Eigen::VectorXd next_noise = normals(n, rng);

  // Losses use the temperature from before this update. The policy is not
  // modified until the actor step, so the actor pass also yields the
  // log-probabilities for the temperature loss.
  const double alpha = agent.alpha();
  CriticLoss critic = sac_critic_loss(agent.q, agent.policy, batch, next_noise, alpha, gamma);
  for (int k = 0; k < 2; ++k) require_finite(critic.loss, critic.grad[k], "critic loss");
  for (int k = 0; k < 2; ++k) agent.critic_opt[k].step(agent.q.critic(k).params(), critic.grad[k], lr);
  stats.critic_loss = critic.loss;

  ActorLoss actor = sac_actor_loss(agent.policy, agent.q, batch.obs, noise, alpha);
  require_finite(actor.loss, actor.grad, "actor loss");
  stats.entropy = -actor.mean_log_prob;
  if (config.auto_alpha) {
    double g = 0.0;
    stats.alpha_loss = sac_alpha_loss(agent.log_alpha, actor.mean_log_prob, config.target_entropy, &g);
    Eigen::VectorXd p(1), gv(1);
    p(0) = agent.log_alpha;
    gv(0) = g;
    require_finite(stats.alpha_loss, gv, "temperature loss");
    agent.alpha_opt.step(p, gv, lr);
    agent.log_alpha = p(0);
  }
  Eigen::VectorXd theta = agent.policy.flat();
  agent.policy_opt.step(theta, actor.grad, lr);
  agent.policy.set_flat(theta);
  stats.actor_loss = actor.loss;

  ++agent.updates;
  if (config.target_update_interval > 0 && agent.updates % config.target_update_interval == 0) {
    agent.q.soft_update(config.tau);
  }
  stats.alpha = agent.alpha();
  return stats;
}

}  // namespace ebrake
