#pragma once

#include <Eigen/Dense>
#include <vector>

namespace posekan {

/// Sigmoid linear unit x * sigmoid(x), stable for large |x|.
double silu(double x);
double silu_derivative(double x);

/// Uniform B-spline basis on [lo, hi] with `grid_size` intervals and spline
/// order `order`, extended by `order` extra knots of the same spacing on each
/// side. The basis has grid_size + order member functions; they are
/// non-negative, compactly supported, and sum to one on the interior of the
/// domain.
class SplineGrid {
 public:
  SplineGrid(int grid_size, int order, double domain_lo, double domain_hi);

  int grid_size() const { return grid_size_; }
  int order() const { return order_; }
  double domain_lo() const { return lo_; }
  double domain_hi() const { return hi_; }
  double spacing() const { return spacing_; }
  int basis_count() const { return grid_size_ + order_; }
  const std::vector<double>& knots() const { return knots_; }

  /// All basis values at x (Cox-de Boor recursion).
  Eigen::VectorXd basis(double x) const;

  /// Basis values and first derivatives at x, written into caller arrays of
  /// length basis_count(). Hot path for the KAN layer.
  void basis_and_derivative(double x, double* values, double* derivatives) const;

 private:
  int grid_size_;
  int order_;
  double lo_;
  double hi_;
  double spacing_;
  std::vector<double> knots_;  // grid_size + 2*order + 1 uniform knots
};

}  // namespace posekan
