#include "posekan/model.hpp"

#include <string>

#include "posekan/errors.hpp"
#include "posekan/rng.hpp"

namespace posekan {

PoseKanLayerUnit::PoseKanLayerUnit(int in_dim, int out_dim, const ModelConfig& cfg,
                                   std::uint64_t seed, std::uint64_t unit_id)
    : kan_(in_dim, out_dim,
           SplineGrid(cfg.grid_size, cfg.spline_order, cfg.spline_lo, cfg.spline_hi),
           seed),
      dropout_rate_(cfg.dropout),
      unit_id_(unit_id) {}

Eigen::MatrixXd PoseKanLayerUnit::forward(const PropagationMatrix& prop,
                                          const Eigen::MatrixXd& h,
                                          const Eigen::MatrixXd* injection, Mode mode,
                                          std::uint64_t noise_seed, Cache* cache) const {
  Eigen::MatrixXd propagated = injection ? prop.apply(h, *injection) : prop.apply(h);
  Eigen::MatrixXd transformed = kan_.forward(propagated, cache ? &cache->kan : nullptr);
  Rng rng(mix_seed(noise_seed, unit_id_));
  return dropout_forward(transformed, dropout_rate_, mode, rng,
                         cache ? &cache->mask : nullptr);
}

Eigen::MatrixXd PoseKanLayerUnit::backward(const PropagationMatrix& prop,
                                           const Cache& cache,
                                           const Eigen::MatrixXd& upstream,
                                           Eigen::MatrixXd* injection_grad) {
  Eigen::MatrixXd d_transformed = dropout_backward(cache.mask, upstream);
  Eigen::MatrixXd d_propagated = kan_.backward(cache.kan, d_transformed);
  if (injection_grad) {
    *injection_grad += d_propagated;
  }
  // P is symmetric, so the adjoint of H -> P*H is another application of P.
  return prop.apply(d_propagated);
}

ResidualBlock::ResidualBlock(int dim, const ModelConfig& cfg, std::uint64_t seed,
                             std::uint64_t first_unit_id)
    : norm_(dim),
      tail_unit_(dim, dim, cfg, mix_seed(seed, 0x7A11),
                 first_unit_id + static_cast<std::uint64_t>(cfg.stack_depth)) {
  stacked_units_.reserve(static_cast<std::size_t>(cfg.stack_depth));
  for (int i = 0; i < cfg.stack_depth; ++i) {
    stacked_units_.emplace_back(dim, dim, cfg, mix_seed(seed, static_cast<std::uint64_t>(i)),
                                first_unit_id + static_cast<std::uint64_t>(i));
  }
}

Eigen::MatrixXd ResidualBlock::forward(const PropagationMatrix& prop,
                                       const Eigen::MatrixXd& input,
                                       const Eigen::MatrixXd* injection, Mode mode,
                                       std::uint64_t noise_seed, Cache* cache) const {
  if (cache) cache->stack.resize(stacked_units_.size());
  Eigen::MatrixXd h = input;
  for (std::size_t i = 0; i < stacked_units_.size(); ++i) {
    h = stacked_units_[i].forward(prop, h, injection, mode, noise_seed,
                                  cache ? &cache->stack[i] : nullptr);
  }
  Eigen::MatrixXd normed = layernorm_forward(norm_, h, cache ? &cache->norm : nullptr);
  Eigen::MatrixXd tail = tail_unit_.forward(prop, normed, injection, mode, noise_seed,
                                            cache ? &cache->tail : nullptr);
  if (cache) cache->gelu_in = tail;
  return input + gelu(tail);
}

Eigen::MatrixXd ResidualBlock::backward(const PropagationMatrix& prop,
                                        const Cache& cache,
                                        const Eigen::MatrixXd& upstream,
                                        Eigen::MatrixXd* injection_grad) {
  Eigen::MatrixXd d_tail(cache.gelu_in.rows(), cache.gelu_in.cols());
  for (Eigen::Index j = 0; j < cache.gelu_in.cols(); ++j) {
    for (Eigen::Index i = 0; i < cache.gelu_in.rows(); ++i) {
      d_tail(i, j) = upstream(i, j) * gelu_derivative(cache.gelu_in(i, j));
    }
  }
  Eigen::MatrixXd d_normed = tail_unit_.backward(prop, cache.tail, d_tail, injection_grad);
  Eigen::MatrixXd d_h = layernorm_backward(norm_, cache.norm, d_normed);
  for (std::size_t i = stacked_units_.size(); i-- > 0;) {
    d_h = stacked_units_[i].backward(prop, cache.stack[i], d_h, injection_grad);
  }
  return d_h + upstream;  // whole-block skip
}

void ResidualBlock::zero_grads() {
  for (auto& unit : stacked_units_) unit.kan().zero_grads();
  norm_.zero_grads();
  tail_unit_.kan().zero_grads();
}

std::vector<ParamBlock> ResidualBlock::param_blocks(const std::string& prefix) {
  std::vector<ParamBlock> blocks;
  for (std::size_t i = 0; i < stacked_units_.size(); ++i) {
    auto unit_blocks =
        stacked_units_[i].kan().param_blocks(prefix + ".unit" + std::to_string(i));
    blocks.insert(blocks.end(), unit_blocks.begin(), unit_blocks.end());
  }
  blocks.push_back({prefix + ".norm.scale", norm_.scale.data(), norm_.scale_grad.data(),
                    static_cast<std::size_t>(norm_.scale.size())});
  blocks.push_back({prefix + ".norm.shift", norm_.shift.data(), norm_.shift_grad.data(),
                    static_cast<std::size_t>(norm_.shift.size())});
  auto tail_blocks = tail_unit_.kan().param_blocks(prefix + ".tail");
  blocks.insert(blocks.end(), tail_blocks.begin(), tail_blocks.end());
  return blocks;
}

namespace {

void validate_config(const ModelConfig& cfg) {
  if (!(cfg.scaling > 0.0 && cfg.scaling < 1.0)) {
    throw ScalingOutOfRangeError("ModelConfig: scaling s = " +
                                 std::to_string(cfg.scaling) +
                                 " must lie in (0, 1)");
  }
  if (cfg.embed_dim < 1) throw BadConfigError("ModelConfig: embed_dim must be >= 1");
  if (cfg.blocks < 1) throw BadConfigError("ModelConfig: blocks must be >= 1");
  if (cfg.stack_depth < 1) throw BadConfigError("ModelConfig: stack_depth must be >= 1");
  if (cfg.grid_size < 1) throw BadConfigError("ModelConfig: grid_size must be >= 1");
  if (cfg.spline_order < 0) throw BadConfigError("ModelConfig: order must be >= 0");
  if (!(cfg.spline_lo < cfg.spline_hi)) {
    throw BadConfigError("ModelConfig: spline domain is empty");
  }
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    throw BadConfigError("ModelConfig: dropout must be in [0, 1)");
  }
}

// Unit ids: start = 0, block b unit i = 1 + b*(stack+1) + i, tail uses
// i = stack, end = last. Gives every dropout site its own stream.
std::uint64_t end_unit_id(const ModelConfig& cfg) {
  return 1 + static_cast<std::uint64_t>(cfg.blocks) *
                 static_cast<std::uint64_t>(cfg.stack_depth + 1);
}

}  // namespace

PoseKanModel::PoseKanModel(SkeletonGraph graph, ModelConfig config)
    : graph_(std::move(graph)),
      config_(config),
      propagation_(graph_, config.scaling),
      start_(2, config.embed_dim, config, mix_seed(config.seed, 0xA110C), 0),
      grn_(config.embed_dim),
      end_(config.embed_dim, 3, config, mix_seed(config.seed, 0xE8D), end_unit_id(config)) {
  blocks_.reserve(static_cast<std::size_t>(config.blocks));
  for (int b = 0; b < config.blocks; ++b) {
    blocks_.emplace_back(config.embed_dim, config,
                         mix_seed(config.seed, 0xB10C, static_cast<std::uint64_t>(b)),
                         1 + static_cast<std::uint64_t>(b) *
                                 static_cast<std::uint64_t>(config.stack_depth + 1));
  }
}

PoseKanModel build_model(const SkeletonGraph& graph, const ModelConfig& config) {
  validate_config(config);
  return PoseKanModel(graph, config);
}

Eigen::MatrixXd PoseKanModel::embed(const Eigen::MatrixXd& input, Mode mode,
                                    std::uint64_t noise_seed, Cache* cache) const {
  if (input.rows() != graph_.joint_count() || input.cols() != 2) {
    throw ShapeMismatchError("PoseKanModel: input must be " +
                             std::to_string(graph_.joint_count()) + "x2, got " +
                             std::to_string(input.rows()) + "x" +
                             std::to_string(input.cols()));
  }
  if (cache) {
    cache->input = input;
    cache->mode = mode;
  }
  const Eigen::MatrixXd* injection = config_.irc ? &input : nullptr;
  Eigen::MatrixXd x_tilde = start_.forward(propagation_, input, injection, mode,
                                           noise_seed, cache ? &cache->start : nullptr);
  if (cache) cache->x_tilde = x_tilde;
  return x_tilde;
}

Eigen::MatrixXd PoseKanModel::lift(const Eigen::MatrixXd& x_tilde, Mode mode,
                                   std::uint64_t noise_seed, Cache* cache) const {
  if (x_tilde.rows() != graph_.joint_count() || x_tilde.cols() != config_.embed_dim) {
    throw ShapeMismatchError("PoseKanModel::lift: embedding shape mismatch");
  }
  if (cache) {
    cache->x_tilde = x_tilde;
    cache->mode = mode;
    cache->blocks.resize(blocks_.size());
  }
  const Eigen::MatrixXd* injection = config_.irc ? &x_tilde : nullptr;
  Eigen::MatrixXd h = x_tilde;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    h = blocks_[b].forward(propagation_, h, injection, mode, noise_seed,
                           cache ? &cache->blocks[b] : nullptr);
  }
  Eigen::MatrixXd contrasted = grn_forward(grn_, h, cache ? &cache->grn : nullptr);
  return end_.forward(propagation_, contrasted, injection, mode, noise_seed,
                      cache ? &cache->end : nullptr);
}

Eigen::MatrixXd PoseKanModel::forward(const Eigen::MatrixXd& input, Mode mode,
                                      std::uint64_t noise_seed, Cache* cache) const {
  Eigen::MatrixXd x_tilde = embed(input, mode, noise_seed, cache);
  return lift(x_tilde, mode, noise_seed, cache);
}

Eigen::MatrixXd PoseKanModel::lift_backward(const Cache& cache,
                                            const Eigen::MatrixXd& upstream) {
  Eigen::MatrixXd x_tilde_grad =
      Eigen::MatrixXd::Zero(cache.x_tilde.rows(), cache.x_tilde.cols());
  Eigen::MatrixXd* injection_grad = config_.irc ? &x_tilde_grad : nullptr;

  Eigen::MatrixXd d_contrasted =
      end_.backward(propagation_, cache.end, upstream, injection_grad);
  Eigen::MatrixXd d_h = grn_backward(grn_, cache.grn, d_contrasted);
  for (std::size_t b = blocks_.size(); b-- > 0;) {
    d_h = blocks_[b].backward(propagation_, cache.blocks[b], d_h, injection_grad);
  }
  // X_tilde is also the trunk input.
  x_tilde_grad += d_h;
  return x_tilde_grad;
}

PoseKanModel::Gradients PoseKanModel::backward(const Cache& cache,
                                               const Eigen::MatrixXd& upstream) {
  Gradients grads;
  grads.x_tilde_grad = lift_backward(cache, upstream);

  Eigen::MatrixXd input_inj_grad =
      Eigen::MatrixXd::Zero(cache.input.rows(), cache.input.cols());
  Eigen::MatrixXd* injection_grad = config_.irc ? &input_inj_grad : nullptr;
  grads.input_grad =
      start_.backward(propagation_, cache.start, grads.x_tilde_grad, injection_grad);
  grads.input_grad += input_inj_grad;
  return grads;
}

std::int64_t PoseKanModel::parameter_count() const {
  const std::int64_t per_edge = config_.grid_size + config_.spline_order + 2;
  const std::int64_t f = config_.embed_dim;
  std::int64_t kan = 2 * f * per_edge;                                   // start
  kan += static_cast<std::int64_t>(config_.blocks) *
         (config_.stack_depth + 1) * f * f * per_edge;                   // stacks + tails
  kan += f * 3 * per_edge;                                               // end
  const std::int64_t norms = 2 * f * (config_.blocks + 1);               // LN per block + GRN
  return kan + norms;
}

std::vector<ParamBlock> PoseKanModel::param_blocks() {
  std::vector<ParamBlock> blocks = start_.kan().param_blocks("start");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto bb = blocks_[b].param_blocks("block" + std::to_string(b));
    blocks.insert(blocks.end(), bb.begin(), bb.end());
  }
  blocks.push_back({"grn.gamma", grn_.gamma.data(), grn_.gamma_grad.data(),
                    static_cast<std::size_t>(grn_.gamma.size())});
  blocks.push_back({"grn.beta", grn_.beta.data(), grn_.beta_grad.data(),
                    static_cast<std::size_t>(grn_.beta.size())});
  auto eb = end_.kan().param_blocks("end");
  blocks.insert(blocks.end(), eb.begin(), eb.end());
  return blocks;
}

void PoseKanModel::zero_grads() {
  start_.kan().zero_grads();
  for (auto& block : blocks_) block.zero_grads();
  grn_.zero_grads();
  end_.kan().zero_grads();
}

}  // namespace posekan
