#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace posekan {

/// Skeletal joint graph with its derived matrices: binary adjacency A,
/// degree-normalized adjacency A_hat = D^{-1/2} A D^{-1/2}, and the
/// normalized Laplacian L = I - A_hat. Immutable after construction.
class SkeletonGraph {
 public:
  SkeletonGraph(int joint_count, const std::vector<std::pair<int, int>>& edges);

  int joint_count() const { return joint_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::MatrixXd& normalized_adjacency() const { return norm_adjacency_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }

 private:
  int joint_count_;
  std::vector<std::pair<int, int>> edges_;
  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd norm_adjacency_;
  Eigen::MatrixXd laplacian_;
};

/// Reads a skeleton topology file: one `joints = <J>` line, then one
/// `edge = <i> <j>` line per edge. `#` starts a comment.
SkeletonGraph load_skeleton(const std::string& path);

/// Multi-hop propagation matrix P = (1-s) * A_hat + s * A_hat^2.
///
/// The dense P is materialized for inspection and oracles, but apply() uses
/// two successive multiplies by A_hat so the square is never formed along the
/// hot path. Scaling outside [0, 1] is rejected; the boundary values are
/// accepted (the propagation collapses to A_hat or A_hat^2) so oracles can
/// probe them, while training configs are validated to the open interval.
class PropagationMatrix {
 public:
  PropagationMatrix(const SkeletonGraph& graph, double scaling);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double scaling() const { return scaling_; }
  int joint_count() const { return static_cast<int>(matrix_.rows()); }

  /// P * H, right-to-left: (1-s) * (A_hat * H) + s * (A_hat * (A_hat * H)).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& h) const;

  /// P * H + X with the same multiplication strategy.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) const;

 private:
  Eigen::MatrixXd norm_adjacency_;
  Eigen::MatrixXd matrix_;
  double scaling_;
};

/// Pointwise spectral response h_s(lambda) = 1 / ((1+s) lambda - s lambda^2),
/// the frequency-domain view of the propagation step. The response is
/// singular at lambda = 0 (and at lambda = (1+s)/s); those frequencies are
/// rejected rather than patched.
class SpectralFilter {
 public:
  explicit SpectralFilter(double scaling);

  double scaling() const { return scaling_; }
  double response(double lambda) const;

 private:
  double scaling_;
};

/// One step of the fixed-point iteration H <- ((1-s) I + s A_hat) A_hat H + X.
/// Algebraically identical to PropagationMatrix::apply(H, X); exposed as an
/// independent route for cross-checking.
Eigen::MatrixXd fixed_point_step(const SkeletonGraph& graph, double scaling,
                                 const Eigen::MatrixXd& h, const Eigen::MatrixXd& x);

struct FilterIdentityReport {
  struct Row {
    std::string name;
    double residual = 0.0;
    bool pass = false;
  };
  std::vector<Row> rows;
  double tolerance = 0.0;

  bool all_pass() const {
    for (const auto& row : rows) {
      if (!row.pass) return false;
    }
    return true;
  }
  double max_residual() const {
    double r = 0.0;
    for (const auto& row : rows) r = std::max(r, row.residual);
    return r;
  }
};

/// Checks the factorization identities behind the propagation step:
///   (i)  (I - sL)(I - L) == I - (1+s)L + sL^2
///   (ii) (I - sL)(I - L) == ((1-s)I + sA_hat) A_hat
///   (iii) P v == ((1-s)mu + s mu^2) v for every eigenpair (mu, v) of A_hat.
FilterIdentityReport verify_filter_identities(const SkeletonGraph& graph,
                                              double scaling,
                                              double tolerance = 1e-10);

}  // namespace posekan
