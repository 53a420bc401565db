#pragma once

#include <Eigen/Dense>

#include "posekan/rng.hpp"

namespace posekan {

enum class Mode { kTrain, kEval };

/// Exact GELU x * Phi(x) via the error function.
double gelu(double x);
double gelu_derivative(double x);
Eigen::MatrixXd gelu(const Eigen::MatrixXd& input);

/// Per-row layer normalization over the feature dimension (joints are rows,
/// features are columns), followed by learnable scale and shift.
struct LayerNormParams {
  Eigen::VectorXd scale;       // gamma, init 1
  Eigen::VectorXd shift;       // beta, init 0
  Eigen::VectorXd scale_grad;
  Eigen::VectorXd shift_grad;
  double epsilon;

  explicit LayerNormParams(int dim, double eps = 1e-5);
  int dim() const { return static_cast<int>(scale.size()); }
  void zero_grads();
};

struct LayerNormCache {
  Eigen::MatrixXd x_hat;     // normalized rows, pre-affine
  Eigen::VectorXd inv_std;   // per-row 1/sqrt(var + eps)
};

Eigen::MatrixXd layernorm_forward(const LayerNormParams& params,
                                  const Eigen::MatrixXd& input,
                                  LayerNormCache* cache = nullptr);
Eigen::MatrixXd layernorm_backward(LayerNormParams& params,
                                   const LayerNormCache& cache,
                                   const Eigen::MatrixXd& upstream);

/// Global response normalization adapted to joint graphs: per channel f,
/// g_f is the L2 norm of column f over joints, n_f = g_f / (mean_f g + eps),
/// and the output is gamma * (H * n) + beta + H with broadcasting over rows.
/// gamma and beta start at zero, making the op the identity at init.
struct GrnParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma_grad;
  Eigen::VectorXd beta_grad;
  double epsilon;

  explicit GrnParams(int dim, double eps = 1e-6);
  int dim() const { return static_cast<int>(gamma.size()); }
  void zero_grads();
};

struct GrnCache {
  Eigen::MatrixXd input;
  Eigen::VectorXd col_norms;   // g
  Eigen::VectorXd n;           // g / (mean(g) + eps)
  double denom = 0.0;          // mean(g) + eps
};

Eigen::MatrixXd grn_forward(const GrnParams& params, const Eigen::MatrixXd& input,
                            GrnCache* cache = nullptr);
Eigen::MatrixXd grn_backward(GrnParams& params, const GrnCache& cache,
                             const Eigen::MatrixXd& upstream);

/// Inverted dropout: in train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); eval mode is the identity.
/// Masks are drawn in row-major order from the supplied stream, so a given
/// (seed, shape) always produces the same mask.
struct DropoutMask {
  Eigen::ArrayXXd scale;   // 0 or 1/(1-rate) per entry
  bool identity = true;    // eval mode or rate 0
};

Eigen::MatrixXd dropout_forward(const Eigen::MatrixXd& input, double rate,
                                Mode mode, Rng& rng, DropoutMask* mask = nullptr);
Eigen::MatrixXd dropout_backward(const DropoutMask& mask,
                                 const Eigen::MatrixXd& upstream);

}  // namespace posekan
