#include "posekan/grad_check.hpp"

#include <cmath>

#include "posekan/rng.hpp"

namespace posekan {

GradCheckReport grad_check(Differentiable& op, double step, double tol_rel,
                           std::uint64_t projection_seed) {
  GradCheckReport report;
  report.tolerance = tol_rel;

  Eigen::MatrixXd base = op.forward();
  Rng rng(projection_seed);
  Eigen::MatrixXd projection(base.rows(), base.cols());
  for (Eigen::Index i = 0; i < base.rows(); ++i) {
    for (Eigen::Index j = 0; j < base.cols(); ++j) {
      projection(i, j) = rng.uniform(-1.0, 1.0);
    }
  }

  op.zero_grads();
  op.backward(projection);

  auto scalarize = [&]() {
    return (op.forward().array() * projection.array()).sum();
  };

  report.pass = true;
  for (const ParamBlock& block : op.blocks()) {
    for (std::size_t i = 0; i < block.size; ++i) {
      const double saved = block.data[i];
      block.data[i] = saved + step;
      double plus = scalarize();
      block.data[i] = saved - step;
      double minus = scalarize();
      block.data[i] = saved;

      double numeric = (plus - minus) / (2.0 * step);
      double analytic = block.grad[i];
      double abs_err = std::abs(analytic - numeric);
      double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (abs_err <= 1e-8) rel = 0.0;  // absolute floor

      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_coordinate = block.name + "[" + std::to_string(i) + "]";
      }
      if (rel > tol_rel) report.pass = false;
      ++report.coordinates_checked;
    }
  }
  return report;
}

}  // namespace posekan
