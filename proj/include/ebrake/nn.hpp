#pragma once

// Fully connected ReLU networks over a flat parameter vector, with reverse-mode
// gradients and Adam. Samples are stored as columns.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ebrake/rng.hpp"

namespace ebrake {

/// A learner update produced a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}; hidden layers use ReLU, the output
  /// layer is linear. Parameters start at zero.
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index param_count() const { return params_.size(); }

  /// Layer k stores its weight matrix (column-major, out x in) followed by its bias.
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  /// Activations kept for backward: the input and every hidden output.
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;

  /// Adds dL/dparams to `grad` given dL/doutput and returns dL/dinput.
  Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                           Eigen::VectorXd& grad) const;

  /// dL/dinput only; skips the parameter gradient.
  Eigen::MatrixXd backward_input(const Tape& tape, const Eigen::MatrixXd& grad_out) const;

  /// Orthogonal weights scaled by `hidden_gain` (hidden layers) and
  /// `output_gain` (last layer); zero biases.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain);

 private:
  Eigen::MatrixXd propagate(const Tape& tape, const Eigen::MatrixXd& grad_out, Eigen::VectorXd* grad) const;

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(Eigen::Index size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  long steps() const { return t_; }

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

/// Scales the concatenation of `grads` down to `max_norm` if it is longer.
/// Returns the norm before clipping.
double clip_global_norm(const std::vector<Eigen::VectorXd*>& grads, double max_norm);

/// Base rate times 0.5 (1 + cos(pi * progress)), progress clamped to [0, 1].
double cosine_lr(double base, double progress);

}  // namespace ebrake
