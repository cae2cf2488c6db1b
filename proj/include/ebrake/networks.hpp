#pragma once

// Policy, value and twin action-value networks for the one-dimensional
// braking action.

#include <cstdint>
#include <vector>

#include "ebrake/env.hpp"
#include "ebrake/nn.hpp"

namespace ebrake {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

enum class PolicyHead {
  kGaussian,     // action = clip(sample, -1, 1)
  kTanhGaussian  // action = tanh(sample)
};

const char* to_string(PolicyHead head);

/// Gaussian over the raw action with a state-dependent mean and a learned,
/// state-independent log standard deviation.
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  PolicyNetwork(PolicyHead head, std::vector<int> hidden, int obs_dim = kObsDim);

  void init(std::uint64_t seed, double initial_log_std = 0.0);

  PolicyHead head() const { return head_; }
  Mlp& body() { return body_; }
  const Mlp& body() const { return body_; }
  double& log_std_param() { return log_std_; }
  double log_std_param() const { return log_std_; }
  /// Clamped to [kLogStdMin, kLogStdMax].
  double log_std() const;
  bool log_std_active() const;

  double mean(const Observation& obs) const;
  /// Deterministic raw action in [-1, 1] (the squashed or clipped mean).
  double act(const Observation& obs) const;

  /// Flat parameters: body parameters followed by log_std.
  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& flat);
  Eigen::Index param_count() const { return body_.param_count() + 1; }

 private:
  PolicyHead head_ = PolicyHead::kGaussian;
  Mlp body_;
  double log_std_ = 0.0;
};

class ValueNetwork {
 public:
  ValueNetwork() = default;
  explicit ValueNetwork(std::vector<int> hidden, int obs_dim = kObsDim);
  void init(std::uint64_t seed);
  Mlp& body() { return body_; }
  const Mlp& body() const { return body_; }
  double value(const Observation& obs) const;

 private:
  Mlp body_;
};

/// Two critics over observation and action with Polyak-averaged targets.
class TwinQNetwork {
 public:
  TwinQNetwork() = default;
  explicit TwinQNetwork(std::vector<int> hidden, int obs_dim = kObsDim);
  void init(std::uint64_t seed);

  Mlp& critic(int k) { return critics_[k]; }
  const Mlp& critic(int k) const { return critics_[k]; }
  Mlp& target(int k) { return targets_[k]; }
  const Mlp& target(int k) const { return targets_[k]; }

  /// target <- tau * critic + (1 - tau) * target, both critics.
  void soft_update(double tau);

 private:
  Mlp critics_[2];
  Mlp targets_[2];
};

/// p <- tau * source + (1 - tau) * p.
void polyak(Eigen::VectorXd& target, const Eigen::VectorXd& source, double tau);

/// Packs observations into columns.
Eigen::MatrixXd stack(const std::vector<Observation>& observations);
Eigen::VectorXd to_vector(const Observation& obs);

}  // namespace ebrake
