#include "posekan/kan_layer.hpp"

#include <cmath>

#include "posekan/errors.hpp"
#include "posekan/rng.hpp"

namespace posekan {

KanLayer::KanLayer(int in_dim, int out_dim, SplineGrid grid, std::uint64_t seed)
    : in_dim_(in_dim), out_dim_(out_dim), grid_(std::move(grid)) {
  if (in_dim < 1 || out_dim < 1) {
    throw BadDimensionsError("KanLayer: dimensions must be >= 1");
  }
  const int bases = grid_.basis_count();

  base_weight_.resize(out_dim_, in_dim_);
  spline_coeffs_.resize(out_dim_, in_dim_ * bases);
  spline_weight_ = Eigen::MatrixXd::Ones(out_dim_, in_dim_);

  // Base weights Xavier-uniform, spline coefficients small zero-mean noise,
  // spline mixing weight one: the layer starts close to a SiLU-linear map.
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim_ + out_dim_));
  for (int q = 0; q < out_dim_; ++q) {
    for (int p = 0; p < in_dim_; ++p) {
      base_weight_(q, p) = rng.uniform(-bound, bound);
    }
  }
  const double coeff_std = 0.1 / std::sqrt(static_cast<double>(bases));
  for (int q = 0; q < out_dim_; ++q) {
    for (int c = 0; c < in_dim_ * bases; ++c) {
      spline_coeffs_(q, c) = coeff_std * rng.normal();
    }
  }

  spline_coeffs_grad_ = Eigen::MatrixXd::Zero(out_dim_, in_dim_ * bases);
  base_weight_grad_ = Eigen::MatrixXd::Zero(out_dim_, in_dim_);
  spline_weight_grad_ = Eigen::MatrixXd::Zero(out_dim_, in_dim_);
}

std::int64_t KanLayer::parameter_count() const {
  return static_cast<std::int64_t>(in_dim_) * out_dim_ * (grid_.basis_count() + 2);
}

double KanLayer::edge_activation(int q, int p, double x) const {
  if (q < 0 || q >= out_dim_ || p < 0 || p >= in_dim_) {
    throw IndexOutOfRangeError("KanLayer::edge_activation: index (" +
                               std::to_string(q) + ", " + std::to_string(p) +
                               ") out of range");
  }
  const int bases = grid_.basis_count();
  Eigen::VectorXd b = grid_.basis(x);
  double spline_sum = 0.0;
  for (int i = 0; i < bases; ++i) {
    spline_sum += spline_coeffs_(q, p * bases + i) * b(i);
  }
  return base_weight_(q, p) * silu(x) + spline_weight_(q, p) * spline_sum;
}

Eigen::MatrixXd KanLayer::forward(const Eigen::MatrixXd& input, KanCache* cache) const {
  if (input.cols() != in_dim_) {
    throw ShapeMismatchError("KanLayer::forward: input has " +
                             std::to_string(input.cols()) + " columns, layer takes " +
                             std::to_string(in_dim_));
  }
  const Eigen::Index rows = input.rows();
  const int bases = grid_.basis_count();

  Eigen::MatrixXd silu_vals(rows, in_dim_);
  Eigen::MatrixXd silu_derivs(rows, in_dim_);
  Eigen::MatrixXd basis(rows, in_dim_ * bases);
  Eigen::MatrixXd basis_deriv(rows, in_dim_ * bases);
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (int p = 0; p < in_dim_; ++p) {
      const double x = input(j, p);
      silu_vals(j, p) = silu(x);
      silu_derivs(j, p) = silu_derivative(x);
      grid_.basis_and_derivative(x, &basis(j, p * bases), &basis_deriv(j, p * bases));
    }
  }

  // Fold w_s into the coefficients so the spline branch is one dense product.
  Eigen::MatrixXd folded(out_dim_, in_dim_ * bases);
  for (int q = 0; q < out_dim_; ++q) {
    for (int p = 0; p < in_dim_; ++p) {
      folded.block(q, p * bases, 1, bases) =
          spline_weight_(q, p) * spline_coeffs_.block(q, p * bases, 1, bases);
    }
  }

  Eigen::MatrixXd out(rows, out_dim_);
  out.noalias() = basis * folded.transpose();
  out.noalias() += silu_vals * base_weight_.transpose();

  if (cache) {
    cache->input = input;
    cache->silu_vals = std::move(silu_vals);
    cache->silu_derivs = std::move(silu_derivs);
    cache->basis = std::move(basis);
    cache->basis_deriv = std::move(basis_deriv);
  }
  return out;
}

Eigen::MatrixXd KanLayer::backward(const KanCache& cache, const Eigen::MatrixXd& upstream) {
  const int bases = grid_.basis_count();
  if (cache.input.cols() != in_dim_ ||
      cache.basis.cols() != static_cast<Eigen::Index>(in_dim_) * bases) {
    throw StaleCacheError("KanLayer::backward: cache does not match layer shape");
  }
  if (upstream.rows() != cache.input.rows() || upstream.cols() != out_dim_) {
    throw StaleCacheError("KanLayer::backward: upstream shape does not match cache");
  }

  // Gradient w.r.t. the folded coefficients w_s[q,p] * c[q,p,i].
  Eigen::MatrixXd folded_grad(out_dim_, in_dim_ * bases);
  folded_grad.noalias() = upstream.transpose() * cache.basis;

  for (int q = 0; q < out_dim_; ++q) {
    for (int p = 0; p < in_dim_; ++p) {
      const auto fg = folded_grad.block(q, p * bases, 1, bases);
      spline_coeffs_grad_.block(q, p * bases, 1, bases) += spline_weight_(q, p) * fg;
      spline_weight_grad_(q, p) +=
          fg.cwiseProduct(spline_coeffs_.block(q, p * bases, 1, bases)).sum();
    }
  }
  base_weight_grad_.noalias() += upstream.transpose() * cache.silu_vals;

  // Input gradient: base branch plus the spline branch contracted over the
  // folded coefficients and basis derivatives.
  Eigen::MatrixXd input_grad =
      ((upstream * base_weight_).array() * cache.silu_derivs.array()).matrix();

  Eigen::MatrixXd folded(out_dim_, in_dim_ * bases);
  for (int q = 0; q < out_dim_; ++q) {
    for (int p = 0; p < in_dim_; ++p) {
      folded.block(q, p * bases, 1, bases) =
          spline_weight_(q, p) * spline_coeffs_.block(q, p * bases, 1, bases);
    }
  }
  Eigen::MatrixXd spread(cache.input.rows(), in_dim_ * bases);
  spread.noalias() = upstream * folded;
  spread.array() *= cache.basis_deriv.array();
  for (int p = 0; p < in_dim_; ++p) {
    input_grad.col(p) += spread.middleCols(p * bases, bases).rowwise().sum();
  }
  return input_grad;
}

void KanLayer::zero_grads() {
  spline_coeffs_grad_.setZero();
  base_weight_grad_.setZero();
  spline_weight_grad_.setZero();
}

std::vector<ParamBlock> KanLayer::param_blocks(const std::string& prefix) {
  return {
      {prefix + ".spline_coeffs", spline_coeffs_.data(), spline_coeffs_grad_.data(),
       static_cast<std::size_t>(spline_coeffs_.size())},
      {prefix + ".base_weight", base_weight_.data(), base_weight_grad_.data(),
       static_cast<std::size_t>(base_weight_.size())},
      {prefix + ".spline_weight", spline_weight_.data(), spline_weight_grad_.data(),
       static_cast<std::size_t>(spline_weight_.size())},
  };
}

}  // namespace posekan
