#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "posekan/grad_check.hpp"
#include "posekan/spline.hpp"

namespace posekan {

/// Forward-pass cache for one KAN layer application. Holds the per-input
/// basis and SiLU evaluations so backward never re-runs the spline recursion.
struct KanCache {
  Eigen::MatrixXd input;        // rows x in_dim
  Eigen::MatrixXd silu_vals;    // rows x in_dim
  Eigen::MatrixXd silu_derivs;  // rows x in_dim
  Eigen::MatrixXd basis;        // rows x in_dim*(G+k)
  Eigen::MatrixXd basis_deriv;  // rows x in_dim*(G+k)
};

/// One KAN layer: an out_dim x in_dim matrix of learnable scalar activations
/// phi_{q,p}(x) = w_b[q,p] * silu(x) + w_s[q,p] * sum_i c[q,p,i] B_i(x),
/// applied row-wise with shared parameters (every joint uses the same Phi).
///
/// spline_coeffs is stored as out_dim x in_dim*(G+k) with the (p, i) pair
/// flattened as p*(G+k)+i, which lets both passes run as dense products
/// against the flattened basis matrix.
class KanLayer {
 public:
  KanLayer(int in_dim, int out_dim, SplineGrid grid, std::uint64_t seed);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const SplineGrid& grid() const { return grid_; }

  /// in*out*(G+k+2): coefficients plus the two mixing weights per edge.
  std::int64_t parameter_count() const;

  double edge_activation(int q, int p, double x) const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, KanCache* cache = nullptr) const;

  /// Accumulates parameter gradients and returns the input gradient.
  Eigen::MatrixXd backward(const KanCache& cache, const Eigen::MatrixXd& upstream);

  Eigen::MatrixXd& spline_coeffs() { return spline_coeffs_; }
  Eigen::MatrixXd& base_weight() { return base_weight_; }
  Eigen::MatrixXd& spline_weight() { return spline_weight_; }
  const Eigen::MatrixXd& spline_coeffs() const { return spline_coeffs_; }
  const Eigen::MatrixXd& base_weight() const { return base_weight_; }
  const Eigen::MatrixXd& spline_weight() const { return spline_weight_; }
  Eigen::MatrixXd& spline_coeffs_grad() { return spline_coeffs_grad_; }
  Eigen::MatrixXd& base_weight_grad() { return base_weight_grad_; }
  Eigen::MatrixXd& spline_weight_grad() { return spline_weight_grad_; }

  void zero_grads();

  /// Parameter/gradient spans in declaration order, names prefixed.
  std::vector<ParamBlock> param_blocks(const std::string& prefix);

 private:
  int in_dim_;
  int out_dim_;
  SplineGrid grid_;
  Eigen::MatrixXd spline_coeffs_;       // out x in*(G+k)
  Eigen::MatrixXd base_weight_;         // out x in
  Eigen::MatrixXd spline_weight_;       // out x in
  Eigen::MatrixXd spline_coeffs_grad_;
  Eigen::MatrixXd base_weight_grad_;
  Eigen::MatrixXd spline_weight_grad_;
};

}  // namespace posekan
