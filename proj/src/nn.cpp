#include "ebrake/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebrake {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    if (sizes_[k] <= 0 || sizes_[k + 1] <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[k + 1]) * (sizes_[k] + 1);
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int k) {
  return {params_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int k) const {
  return {params_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int k) {
  return {params_.data() + offsets_[k] + Eigen::Index{sizes_[k + 1]} * sizes_[k], sizes_[k + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int k) const {
  return {params_.data() + offsets_[k] + Eigen::Index{sizes_[k + 1]} * sizes_[k], sizes_[k + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  Eigen::MatrixXd a = x;
  for (int k = 0; k < layer_count(); ++k) {
    Eigen::MatrixXd z = weight(k) * a;
    z.colwise() += bias(k);
    if (k + 1 < layer_count()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  if (x.rows() != input_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  tape.inputs.clear();
  tape.inputs.push_back(x);
  for (int k = 0; k < layer_count(); ++k) {
    Eigen::MatrixXd z = weight(k) * tape.inputs.back();
    z.colwise() += bias(k);
    if (k + 1 == layer_count()) return z;
    tape.inputs.push_back(z.cwiseMax(0.0));
  }
  return {};
}

Eigen::MatrixXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                              Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("Mlp::backward: gradient size mismatch");
  return propagate(tape, grad_out, &grad);
}

Eigen::MatrixXd Mlp::backward_input(const Tape& tape, const Eigen::MatrixXd& grad_out) const {
  return propagate(tape, grad_out, nullptr);
}

Eigen::MatrixXd Mlp::propagate(const Tape& tape, const Eigen::MatrixXd& grad_out,
                               Eigen::VectorXd* grad) const {
  if (tape.inputs.size() != static_cast<std::size_t>(layer_count()) || grad_out.rows() != output_dim() ||
      grad_out.cols() != tape.inputs[0].cols()) {
    throw std::invalid_argument("Mlp::backward: tape does not match the gradient");
  }
  Eigen::MatrixXd delta = grad_out;
  for (int k = layer_count() - 1; k >= 0; --k) {
    const Eigen::MatrixXd& a = tape.inputs[k];
    if (grad) {
      Eigen::Map<Eigen::MatrixXd> gw(grad->data() + offsets_[k], sizes_[k + 1], sizes_[k]);
      Eigen::Map<Eigen::VectorXd> gb(grad->data() + offsets_[k] + Eigen::Index{sizes_[k + 1]} * sizes_[k],
                                     sizes_[k + 1]);
      gw.noalias() += delta * a.transpose();
      gb += delta.rowwise().sum();
    }
    Eigen::MatrixXd next = weight(k).transpose() * delta;
    if (k > 0) next = next.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    delta = std::move(next);
  }
  return delta;
}

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
  for (int k = 0; k < layer_count(); ++k) {
    const int rows = sizes_[k + 1];
    const int cols = sizes_[k];
    const int big = std::max(rows, cols);
    const int small = std::min(rows, cols);
    Eigen::MatrixXd g(big, small);
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (int j = 0; j < small; ++j) {
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    const double gain = k + 1 == layer_count() ? output_gain : hidden_gain;
    if (rows >= cols) {
      weight(k) = gain * q;
    } else {
      weight(k) = gain * q.transpose();
    }
    bias(k).setZero();
  }
}

Adam::Adam(Eigen::Index size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != m_.size() || params.size() != m_.size()) {
    throw std::invalid_argument("Adam::step: size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double clip_global_norm(const std::vector<Eigen::VectorXd*>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / (norm + 1e-6);
    for (auto* g : grads) *g *= scale;
  }
  return norm;
}

double cosine_lr(double base, double progress) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * p));
}

}  // namespace ebrake
