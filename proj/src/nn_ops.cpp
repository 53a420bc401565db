#include "posekan/nn_ops.hpp"

#include <cmath>
#include <string>

#include "posekan/errors.hpp"

namespace posekan {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
}  // namespace

double gelu(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInputError("gelu: non-finite input");
  }
  return x * 0.5 * std::erfc(-x * kInvSqrt2);
}

double gelu_derivative(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInputError("gelu_derivative: non-finite input");
  }
  double cdf = 0.5 * std::erfc(-x * kInvSqrt2);
  double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

Eigen::MatrixXd gelu(const Eigen::MatrixXd& input) {
  Eigen::MatrixXd out(input.rows(), input.cols());
  for (Eigen::Index j = 0; j < input.cols(); ++j) {
    for (Eigen::Index i = 0; i < input.rows(); ++i) {
      out(i, j) = gelu(input(i, j));
    }
  }
  return out;
}

LayerNormParams::LayerNormParams(int dim, double eps)
    : scale(Eigen::VectorXd::Ones(dim)),
      shift(Eigen::VectorXd::Zero(dim)),
      scale_grad(Eigen::VectorXd::Zero(dim)),
      shift_grad(Eigen::VectorXd::Zero(dim)),
      epsilon(eps) {
  if (dim < 1) throw BadDimensionsError("LayerNormParams: dim must be >= 1");
  if (!(eps > 0.0)) throw BadConfigError("LayerNormParams: epsilon must be > 0");
}

void LayerNormParams::zero_grads() {
  scale_grad.setZero();
  shift_grad.setZero();
}

Eigen::MatrixXd layernorm_forward(const LayerNormParams& params,
                                  const Eigen::MatrixXd& input,
                                  LayerNormCache* cache) {
  const Eigen::Index dim = params.scale.size();
  if (input.cols() != dim) {
    throw ShapeMismatchError("layernorm_forward: input has " +
                             std::to_string(input.cols()) + " features, params " +
                             std::to_string(dim));
  }
  const Eigen::Index rows = input.rows();
  Eigen::MatrixXd x_hat(rows, dim);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    double mean = input.row(j).mean();
    Eigen::RowVectorXd centered = input.row(j).array() - mean;
    double var = centered.squaredNorm() / static_cast<double>(dim);
    double is = 1.0 / std::sqrt(var + params.epsilon);
    x_hat.row(j) = centered * is;
    inv_std(j) = is;
  }
  if (cache) {
    cache->x_hat = x_hat;
    cache->inv_std = inv_std;
  }
  return (x_hat.array().rowwise() * params.scale.transpose().array()).rowwise() +
         params.shift.transpose().array();
}

Eigen::MatrixXd layernorm_backward(LayerNormParams& params,
                                   const LayerNormCache& cache,
                                   const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != cache.x_hat.rows() || upstream.cols() != cache.x_hat.cols()) {
    throw StaleCacheError("layernorm_backward: upstream shape does not match cache");
  }
  const Eigen::Index rows = upstream.rows();
  const Eigen::Index dim = upstream.cols();

  params.scale_grad += (upstream.array() * cache.x_hat.array()).colwise().sum().matrix();
  params.shift_grad += upstream.colwise().sum();

  Eigen::MatrixXd input_grad(rows, dim);
  for (Eigen::Index j = 0; j < rows; ++j) {
    Eigen::RowVectorXd g =
        upstream.row(j).array() * params.scale.transpose().array();
    double g_mean = g.mean();
    double gx_mean =
        (g.array() * cache.x_hat.row(j).array()).mean();
    input_grad.row(j) =
        cache.inv_std(j) *
        (g.array() - g_mean - cache.x_hat.row(j).array() * gx_mean);
  }
  return input_grad;
}

GrnParams::GrnParams(int dim, double eps)
    : gamma(Eigen::VectorXd::Zero(dim)),
      beta(Eigen::VectorXd::Zero(dim)),
      gamma_grad(Eigen::VectorXd::Zero(dim)),
      beta_grad(Eigen::VectorXd::Zero(dim)),
      epsilon(eps) {
  if (dim < 1) throw BadDimensionsError("GrnParams: dim must be >= 1");
  if (!(eps > 0.0)) throw BadConfigError("GrnParams: epsilon must be > 0");
}

void GrnParams::zero_grads() {
  gamma_grad.setZero();
  beta_grad.setZero();
}

Eigen::MatrixXd grn_forward(const GrnParams& params, const Eigen::MatrixXd& input,
                            GrnCache* cache) {
  const Eigen::Index dim = params.gamma.size();
  if (input.cols() != dim) {
    throw ShapeMismatchError("grn_forward: input has " +
                             std::to_string(input.cols()) + " features, params " +
                             std::to_string(dim));
  }
  Eigen::VectorXd col_norms = input.colwise().norm();
  double denom = col_norms.mean() + params.epsilon;
  Eigen::VectorXd n = col_norms / denom;

  Eigen::MatrixXd out =
      (input.array().rowwise() *
       (params.gamma.array() * n.array()).transpose())
          .rowwise() +
      params.beta.transpose().array();
  out += input;

  if (cache) {
    cache->input = input;
    cache->col_norms = col_norms;
    cache->n = n;
    cache->denom = denom;
  }
  return out;
}

Eigen::MatrixXd grn_backward(GrnParams& params, const GrnCache& cache,
                             const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != cache.input.rows() || upstream.cols() != cache.input.cols()) {
    throw StaleCacheError("grn_backward: upstream shape does not match cache");
  }
  const Eigen::Index dim = upstream.cols();
  const double denom = cache.denom;

  params.beta_grad += upstream.colwise().sum();
  params.gamma_grad += ((upstream.array() * cache.input.array()).colwise().sum() *
                        cache.n.transpose().array())
                           .matrix();

  // s_f = sum_j U[j][f] * gamma_f * H[j][f]: sensitivity of the loss to n_f.
  Eigen::VectorXd s = ((upstream.array() * cache.input.array()).colwise().sum() *
                       params.gamma.transpose().array())
                          .matrix();
  double weighted = s.dot(cache.col_norms);

  // dL/dg_f through n = g / (mean(g) + eps).
  Eigen::VectorXd dg =
      s / denom -
      Eigen::VectorXd::Constant(dim, weighted / (denom * denom * static_cast<double>(dim)));

  Eigen::MatrixXd input_grad =
      upstream.array().rowwise() *
      (params.gamma.array() * cache.n.array() + 1.0).transpose();
  // Column norms back to entries: dg_f * H[j][f] / g_f, zero where the whole
  // column is zero (the norm has no defined gradient there and every term
  // vanishes anyway).
  for (Eigen::Index f = 0; f < dim; ++f) {
    double g = cache.col_norms(f);
    if (g > 0.0) {
      input_grad.col(f) += (dg(f) / g) * cache.input.col(f);
    }
  }
  return input_grad;
}

Eigen::MatrixXd dropout_forward(const Eigen::MatrixXd& input, double rate,
                                Mode mode, Rng& rng, DropoutMask* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw BadConfigError("dropout_forward: rate must be in [0, 1), got " +
                         std::to_string(rate));
  }
  if (mode == Mode::kEval || rate == 0.0) {
    if (mask) {
      mask->identity = true;
      mask->scale.resize(0, 0);
    }
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::ArrayXXd scale(input.rows(), input.cols());
  for (Eigen::Index i = 0; i < input.rows(); ++i) {
    for (Eigen::Index j = 0; j < input.cols(); ++j) {
      scale(i, j) = (rng.uniform() >= rate) ? keep_scale : 0.0;
    }
  }
  if (mask) {
    mask->identity = false;
    mask->scale = scale;
  }
  return (input.array() * scale).matrix();
}

Eigen::MatrixXd dropout_backward(const DropoutMask& mask,
                                 const Eigen::MatrixXd& upstream) {
  if (mask.identity) return upstream;
  if (mask.scale.rows() != upstream.rows() || mask.scale.cols() != upstream.cols()) {
    throw StaleCacheError("dropout_backward: upstream shape does not match mask");
  }
  return (upstream.array() * mask.scale).matrix();
}

}  // namespace posekan
