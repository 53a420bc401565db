#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "posekan/grad_check.hpp"

namespace posekan {

/// AMSGrad optimizer state over a flat parameter vector, plus the epoch
/// bookkeeping for the step-decay learning-rate schedule.
struct TrainState {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 1e-3;
  double lr0 = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.99;
  int decay_every = 4;
  std::uint64_t rng_seed = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  Eigen::VectorXd v_hat;

  /// Allocates (zero) moment vectors for n parameters if not already sized.
  void ensure_size(Eigen::Index n);
};

/// lr0 * decay^floor(epoch / decay_every).
double lr_schedule(double lr0, double decay, int decay_every, int epoch);

/// One AMSGrad update over the blocks, in order:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
///   v_hat <- max(v_hat, v);  theta <- theta - lr * m / (sqrt(v_hat) + eps).
/// No bias correction (the original AMSGrad formulation). Non-finite
/// gradients abort the step before any parameter is touched.
void amsgrad_step(TrainState& state, const std::vector<ParamBlock>& params);

}  // namespace posekan
