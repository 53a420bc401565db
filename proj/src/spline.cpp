#include "posekan/spline.hpp"

#include <cmath>
#include <string>

#include "posekan/errors.hpp"

namespace posekan {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double silu(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInputError("silu: non-finite input");
  }
  return x * sigmoid(x);
}

double silu_derivative(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInputError("silu_derivative: non-finite input");
  }
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

SplineGrid::SplineGrid(int grid_size, int order, double domain_lo, double domain_hi)
    : grid_size_(grid_size), order_(order), lo_(domain_lo), hi_(domain_hi) {
  if (grid_size < 1) {
    throw BadDimensionsError("SplineGrid: grid_size must be >= 1, got " +
                             std::to_string(grid_size));
  }
  if (order < 0) {
    throw BadDimensionsError("SplineGrid: order must be >= 0, got " +
                             std::to_string(order));
  }
  if (!(domain_lo < domain_hi)) {
    throw BadDimensionsError("SplineGrid: domain_lo must be < domain_hi");
  }
  spacing_ = (hi_ - lo_) / static_cast<double>(grid_size_);
  knots_.resize(static_cast<std::size_t>(grid_size_ + 2 * order_ + 1));
  for (int i = 0; i <= grid_size_ + 2 * order_; ++i) {
    knots_[static_cast<std::size_t>(i)] = lo_ + (i - order_) * spacing_;
  }
}

Eigen::VectorXd SplineGrid::basis(double x) const {
  Eigen::VectorXd values(basis_count());
  Eigen::VectorXd derivatives(basis_count());
  basis_and_derivative(x, values.data(), derivatives.data());
  return values;
}

void SplineGrid::basis_and_derivative(double x, double* values,
                                      double* derivatives) const {
  if (!std::isfinite(x)) {
    throw NonFiniteInputError("SplineGrid: non-finite evaluation point");
  }

  const int k = order_;
  const int count = basis_count();

  // Order-0 indicators over the half-open knot intervals. There are
  // grid_size + 2*order of them; the recursion shrinks the row by one per
  // order, ending at grid_size + order functions of order k.
  std::vector<double> row(static_cast<std::size_t>(grid_size_ + 2 * k));
  for (int i = 0; i < grid_size_ + 2 * k; ++i) {
    row[static_cast<std::size_t>(i)] =
        (x >= knots_[static_cast<std::size_t>(i)] &&
         x < knots_[static_cast<std::size_t>(i + 1)])
            ? 1.0
            : 0.0;
  }

  // Cox-de Boor up to order k-1. Uniform knots make every denominator
  // ord * spacing, never zero.
  for (int ord = 1; ord < k; ++ord) {
    const double span = ord * spacing_;
    for (int i = 0; i < grid_size_ + 2 * k - ord; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const double left = (x - knots_[si]) / span;
      const double right = (knots_[si + static_cast<std::size_t>(ord) + 1] - x) / span;
      row[si] = left * row[si] + right * row[si + 1];
    }
  }

  if (k == 0) {
    for (int i = 0; i < count; ++i) {
      values[i] = row[static_cast<std::size_t>(i)];
      derivatives[i] = 0.0;  // indicator functions: zero a.e.
    }
    return;
  }

  // Final step to order k, plus the derivative from the order k-1 row:
  // B'_{i,k}(x) = k * (B_{i,k-1}/(t_{i+k}-t_i) - B_{i+1,k-1}/(t_{i+k+1}-t_{i+1}))
  // which collapses to (B_{i,k-1} - B_{i+1,k-1}) / spacing on a uniform grid.
  const double span = k * spacing_;
  for (int i = 0; i < count; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double left = (x - knots_[si]) / span;
    const double right = (knots_[si + static_cast<std::size_t>(k) + 1] - x) / span;
    values[i] = left * row[si] + right * row[si + 1];
    derivatives[i] = (row[si] - row[si + 1]) / spacing_;
  }
}

}  // namespace posekan
