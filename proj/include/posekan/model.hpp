#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "posekan/graph.hpp"
#include "posekan/kan_layer.hpp"
#include "posekan/nn_ops.hpp"

namespace posekan {

struct ModelConfig {
  int embed_dim = 240;
  double scaling = 0.2;
  int grid_size = 5;
  int spline_order = 3;
  double spline_lo = -1.0;
  double spline_hi = 1.0;
  double dropout = 0.2;
  int blocks = 4;
  int stack_depth = 5;
  bool irc = true;
  std::uint64_t seed = 0;
};

/// One PoseKAN layer: propagate (P*H, plus the injected residual when the
/// initial residual connection is on), transform with a KAN layer, then
/// dropout in train mode. The injected matrix is the raw 2D input for the
/// start unit and the start-layer output for every later unit.
class PoseKanLayerUnit {
 public:
  struct Cache {
    KanCache kan;
    DropoutMask mask;
  };

  PoseKanLayerUnit(int in_dim, int out_dim, const ModelConfig& cfg,
                   std::uint64_t seed, std::uint64_t unit_id);

  Eigen::MatrixXd forward(const PropagationMatrix& prop, const Eigen::MatrixXd& h,
                          const Eigen::MatrixXd* injection, Mode mode,
                          std::uint64_t noise_seed, Cache* cache) const;

  /// Returns the gradient w.r.t. h; adds the gradient w.r.t. the injected
  /// matrix into *injection_grad when provided.
  Eigen::MatrixXd backward(const PropagationMatrix& prop, const Cache& cache,
                           const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* injection_grad);

  KanLayer& kan() { return kan_; }
  const KanLayer& kan() const { return kan_; }
  double dropout_rate() const { return dropout_rate_; }

 private:
  KanLayer kan_;
  double dropout_rate_;
  std::uint64_t unit_id_;
};

/// Residual PoseKAN block: a stack of PoseKAN layers, layer normalization, a
/// tail PoseKAN layer, GELU, and a whole-block skip connection.
class ResidualBlock {
 public:
  struct Cache {
    std::vector<PoseKanLayerUnit::Cache> stack;
    LayerNormCache norm;
    PoseKanLayerUnit::Cache tail;
    Eigen::MatrixXd gelu_in;
  };

  ResidualBlock(int dim, const ModelConfig& cfg, std::uint64_t seed,
                std::uint64_t first_unit_id);

  Eigen::MatrixXd forward(const PropagationMatrix& prop, const Eigen::MatrixXd& input,
                          const Eigen::MatrixXd* injection, Mode mode,
                          std::uint64_t noise_seed, Cache* cache) const;

  Eigen::MatrixXd backward(const PropagationMatrix& prop, const Cache& cache,
                           const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* injection_grad);

  std::vector<PoseKanLayerUnit>& stacked_units() { return stacked_units_; }
  PoseKanLayerUnit& tail_unit() { return tail_unit_; }
  LayerNormParams& norm() { return norm_; }

  void zero_grads();
  std::vector<ParamBlock> param_blocks(const std::string& prefix);

 private:
  std::vector<PoseKanLayerUnit> stacked_units_;
  LayerNormParams norm_;
  PoseKanLayerUnit tail_unit_;
};

/// The full network: start layer (2 -> F), residual blocks, global response
/// normalization, end layer (F -> 3).
class PoseKanModel {
 public:
  struct Cache {
    Eigen::MatrixXd input;    // J x 2
    PoseKanLayerUnit::Cache start;
    Eigen::MatrixXd x_tilde;  // J x F, start-layer output
    std::vector<ResidualBlock::Cache> blocks;
    GrnCache grn;
    PoseKanLayerUnit::Cache end;
    Mode mode = Mode::kEval;
  };

  struct Gradients {
    Eigen::MatrixXd input_grad;    // J x 2
    Eigen::MatrixXd x_tilde_grad;  // J x F, total fan-in at the injection points
  };

  PoseKanModel(SkeletonGraph graph, ModelConfig config);

  /// Full forward pass J x 2 -> J x 3. `noise_seed` drives the dropout
  /// streams in train mode and is ignored in eval mode.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Mode mode,
                          std::uint64_t noise_seed = 0, Cache* cache = nullptr) const;

  /// Start stage only: X -> X_tilde.
  Eigen::MatrixXd embed(const Eigen::MatrixXd& input, Mode mode,
                        std::uint64_t noise_seed = 0, Cache* cache = nullptr) const;

  /// Trunk stage only: X_tilde -> prediction. Exposed so the start output can
  /// be treated as a leaf (for gradient fan-in checks).
  Eigen::MatrixXd lift(const Eigen::MatrixXd& x_tilde, Mode mode,
                       std::uint64_t noise_seed = 0, Cache* cache = nullptr) const;

  /// Exact gradients for every parameter; returns input and X_tilde grads.
  Gradients backward(const Cache& cache, const Eigen::MatrixXd& upstream);

  /// Trunk-only backward matching lift(); accumulates parameter gradients of
  /// the trunk and returns d/dX_tilde.
  Eigen::MatrixXd lift_backward(const Cache& cache, const Eigen::MatrixXd& upstream);

  /// Closed-form scalar count: every KAN layer contributes
  /// in*out*(G+k+2), each block a 2F LayerNorm, and the GRN another 2F.
  std::int64_t parameter_count() const;

  std::vector<ParamBlock> param_blocks();
  void zero_grads();

  const ModelConfig& config() const { return config_; }
  const SkeletonGraph& graph() const { return graph_; }
  const PropagationMatrix& propagation() const { return propagation_; }
  GrnParams& grn() { return grn_; }
  PoseKanLayerUnit& start_unit() { return start_; }
  std::vector<ResidualBlock>& blocks() { return blocks_; }
  PoseKanLayerUnit& end_unit() { return end_; }

 private:
  SkeletonGraph graph_;
  ModelConfig config_;
  PropagationMatrix propagation_;
  PoseKanLayerUnit start_;
  std::vector<ResidualBlock> blocks_;
  GrnParams grn_;
  PoseKanLayerUnit end_;
};

/// Validated constructor used by the CLI: checks config ranges before
/// building (ScalingOutOfRange for s, BadConfig otherwise).
PoseKanModel build_model(const SkeletonGraph& graph, const ModelConfig& config);

}  // namespace posekan
