#include "posekan/optimizer.hpp"

#include <cmath>
#include <string>

#include "posekan/errors.hpp"

namespace posekan {

void TrainState::ensure_size(Eigen::Index n) {
  if (m.size() != n) m = Eigen::VectorXd::Zero(n);
  if (v.size() != n) v = Eigen::VectorXd::Zero(n);
  if (v_hat.size() != n) v_hat = Eigen::VectorXd::Zero(n);
}

double lr_schedule(double lr0, double decay, int decay_every, int epoch) {
  if (epoch < 0) throw BadConfigError("lr_schedule: epoch must be >= 0");
  return lr0 * std::pow(decay, epoch / decay_every);
}

void amsgrad_step(TrainState& state, const std::vector<ParamBlock>& params) {
  Eigen::Index total = 0;
  for (const auto& block : params) total += static_cast<Eigen::Index>(block.size);
  state.ensure_size(total);

  for (const auto& block : params) {
    for (std::size_t i = 0; i < block.size; ++i) {
      if (!std::isfinite(block.grad[i])) {
        throw NonFiniteGradientError("amsgrad_step: non-finite gradient in " +
                                     block.name + "[" + std::to_string(i) + "]");
      }
    }
  }

  Eigen::Index offset = 0;
  for (const auto& block : params) {
    for (std::size_t i = 0; i < block.size; ++i, ++offset) {
      const double g = block.grad[i];
      double& m = state.m(offset);
      double& v = state.v(offset);
      double& v_hat = state.v_hat(offset);
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      v_hat = std::max(v_hat, v);
      block.data[i] -= state.lr * m / (std::sqrt(v_hat) + state.eps);
    }
  }
  ++state.step;
}

}  // namespace posekan
