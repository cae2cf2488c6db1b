#include "ebrake/networks.hpp"

#include <algorithm>
#include <cmath>

namespace ebrake {

namespace {

std::vector<int> layout(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

const char* to_string(PolicyHead head) {
  return head == PolicyHead::kGaussian ? "gaussian" : "tanh-gaussian";
}

PolicyNetwork::PolicyNetwork(PolicyHead head, std::vector<int> hidden, int obs_dim)
    : head_(head), body_(layout(obs_dim, hidden, 1)) {}

void PolicyNetwork::init(std::uint64_t seed, double initial_log_std) {
  Rng rng(derive_seed(seed, streams::kInit, 0));
  body_.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  log_std_ = initial_log_std;
}

double PolicyNetwork::log_std() const { return std::clamp(log_std_, kLogStdMin, kLogStdMax); }

bool PolicyNetwork::log_std_active() const {
  return log_std_ >= kLogStdMin && log_std_ <= kLogStdMax;
}

double PolicyNetwork::mean(const Observation& obs) const {
  return body_.forward(to_vector(obs))(0, 0);
}

double PolicyNetwork::act(const Observation& obs) const {
  const double mu = mean(obs);
  return head_ == PolicyHead::kTanhGaussian ? std::tanh(mu) : std::clamp(mu, -1.0, 1.0);
}

Eigen::VectorXd PolicyNetwork::flat() const {
  Eigen::VectorXd out(param_count());
  out.head(body_.param_count()) = body_.params();
  out(body_.param_count()) = log_std_;
  return out;
}

void PolicyNetwork::set_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count()) throw std::invalid_argument("PolicyNetwork: parameter count mismatch");
  body_.params() = flat.head(body_.param_count());
  log_std_ = flat(body_.param_count());
}

ValueNetwork::ValueNetwork(std::vector<int> hidden, int obs_dim)
    : body_(layout(obs_dim, hidden, 1)) {}

void ValueNetwork::init(std::uint64_t seed) {
  Rng rng(derive_seed(seed, streams::kInit, 1));
  body_.init_orthogonal(rng, std::sqrt(2.0), 1.0);
}

double ValueNetwork::value(const Observation& obs) const {
  return body_.forward(to_vector(obs))(0, 0);
}

TwinQNetwork::TwinQNetwork(std::vector<int> hidden, int obs_dim) {
  for (int k = 0; k < 2; ++k) {
    critics_[k] = Mlp(layout(obs_dim + 1, hidden, 1));
    targets_[k] = critics_[k];
  }
}

void TwinQNetwork::init(std::uint64_t seed) {
  for (int k = 0; k < 2; ++k) {
    Rng rng(derive_seed(seed, streams::kInit, 2 + static_cast<std::uint64_t>(k)));
    critics_[k].init_orthogonal(rng, std::sqrt(2.0), 1.0);
    targets_[k] = critics_[k];
  }
}

void TwinQNetwork::soft_update(double tau) {
  for (int k = 0; k < 2; ++k) polyak(targets_[k].params(), critics_[k].params(), tau);
}

void polyak(Eigen::VectorXd& target, const Eigen::VectorXd& source, double tau) {
  target = tau * source + (1.0 - tau) * target;
}

Eigen::MatrixXd stack(const std::vector<Observation>& observations) {
  Eigen::MatrixXd m(kObsDim, static_cast<Eigen::Index>(observations.size()));
  for (std::size_t j = 0; j < observations.size(); ++j) {
    for (int i = 0; i < kObsDim; ++i) m(i, static_cast<Eigen::Index>(j)) = observations[j][i];
  }
  return m;
}

Eigen::VectorXd to_vector(const Observation& obs) {
  return Eigen::Map<const Eigen::VectorXd>(obs.data(), kObsDim);
}

}  // namespace ebrake
