#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace posekan {

/// A named span of differentiable coordinates with a matching gradient span.
struct ParamBlock {
  std::string name;
  double* data = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

/// Adapter interface for the finite-difference checker: forward() must be a
/// deterministic function of the coordinates exposed through blocks(), and
/// backward(upstream) must accumulate exact gradients into the grad spans
/// after zero_grads().
class Differentiable {
 public:
  virtual ~Differentiable() = default;
  virtual std::vector<ParamBlock> blocks() = 0;
  virtual Eigen::MatrixXd forward() = 0;
  virtual void backward(const Eigen::MatrixXd& upstream) = 0;
  virtual void zero_grads() = 0;
};

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  std::size_t coordinates_checked = 0;
  double tolerance = 0.0;
};

/// Central finite differences on every coordinate of every block. The output
/// matrix is scalarized against a fixed random projection drawn from
/// `projection_seed`, which also serves as the upstream gradient for the
/// analytic pass. A coordinate passes if the analytic/numeric difference is
/// within `tol_rel` relatively or 1e-8 absolutely.
GradCheckReport grad_check(Differentiable& op, double step, double tol_rel,
                           std::uint64_t projection_seed = 12345);

}  // namespace posekan
