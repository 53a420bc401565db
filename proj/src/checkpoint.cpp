#include "posekan/checkpoint.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <vector>

#include "posekan/bytes.hpp"
#include "posekan/errors.hpp"

namespace posekan {

namespace {

constexpr char kMagic[4] = {'P', 'K', 'A', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

void save_checkpoint(const PoseKanModel& model, const TrainState* state,
                     const std::string& path) {
  // Serialization only reads through the spans.
  auto& mutable_model = const_cast<PoseKanModel&>(model);
  auto blocks = mutable_model.param_blocks();

  ByteWriter w;
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);

  const SkeletonGraph& graph = model.graph();
  const ModelConfig& cfg = model.config();
  w.put_u32(static_cast<std::uint32_t>(graph.joint_count()));
  w.put_u32(static_cast<std::uint32_t>(graph.edges().size()));
  for (const auto& [a, b] : graph.edges()) {
    w.put_u32(static_cast<std::uint32_t>(a));
    w.put_u32(static_cast<std::uint32_t>(b));
  }
  w.put_u32(static_cast<std::uint32_t>(cfg.embed_dim));
  w.put_u32(static_cast<std::uint32_t>(cfg.blocks));
  w.put_u32(static_cast<std::uint32_t>(cfg.stack_depth));
  w.put_u32(static_cast<std::uint32_t>(cfg.grid_size));
  w.put_u32(static_cast<std::uint32_t>(cfg.spline_order));
  w.put_u8(cfg.irc ? 1 : 0);
  w.put_u8(state ? 1 : 0);
  w.put_f64(cfg.scaling);
  w.put_f64(cfg.dropout);
  w.put_f64(cfg.spline_lo);
  w.put_f64(cfg.spline_hi);
  w.put_u64(cfg.seed);

  std::uint64_t param_count = 0;
  for (const auto& block : blocks) param_count += block.size;
  w.put_u64(param_count);
  for (const auto& block : blocks) {
    for (std::size_t i = 0; i < block.size; ++i) w.put_f64(block.data[i]);
  }

  if (state) {
    if (state->m.size() != static_cast<Eigen::Index>(param_count) ||
        state->v.size() != static_cast<Eigen::Index>(param_count) ||
        state->v_hat.size() != static_cast<Eigen::Index>(param_count)) {
      throw BadConfigError("save_checkpoint: optimizer state size does not match "
                           "parameter count");
    }
    w.put_i64(state->step);
    w.put_i64(state->epoch);
    w.put_f64(state->lr);
    w.put_f64(state->lr0);
    w.put_f64(state->beta1);
    w.put_f64(state->beta2);
    w.put_f64(state->eps);
    w.put_f64(state->decay);
    w.put_i64(state->decay_every);
    w.put_u64(state->rng_seed);
    for (Eigen::Index i = 0; i < state->m.size(); ++i) w.put_f64(state->m(i));
    for (Eigen::Index i = 0; i < state->v.size(); ++i) w.put_f64(state->v(i));
    for (Eigen::Index i = 0; i < state->v_hat.size(); ++i) w.put_f64(state->v_hat(i));
  }

  std::uint32_t crc = crc_of(w.bytes().data(), w.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_checkpoint: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.size()));
  char crc_bytes[4];
  for (int i = 0; i < 4; ++i) crc_bytes[i] = static_cast<char>(crc >> (8 * i));
  out.write(crc_bytes, 4);
  if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 12) {
    throw CorruptChecksumError("load_checkpoint: " + path + " is too short");
  }
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) {
    stored_crc |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + static_cast<std::size_t>(i)])
                  << (8 * i);
  }
  if (crc_of(bytes.data(), bytes.size() - 4) != stored_crc) {
    throw CorruptChecksumError("load_checkpoint: CRC mismatch in " + path);
  }

  ByteReader r(bytes.data(), bytes.size() - 4, "load_checkpoint: " + path);
  char magic[4];
  r.read_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw VersionMismatchError("load_checkpoint: " + path + " is not a PKAN file");
  }
  std::uint32_t version = r.read_u32();
  if (version != kVersion) {
    throw VersionMismatchError("load_checkpoint: unsupported version " +
                               std::to_string(version));
  }

  int joint_count = static_cast<int>(r.read_u32());
  std::uint32_t edge_count = r.read_u32();
  std::vector<std::pair<int, int>> edges;
  edges.reserve(edge_count);
  for (std::uint32_t e = 0; e < edge_count; ++e) {
    int a = static_cast<int>(r.read_u32());
    int b = static_cast<int>(r.read_u32());
    edges.emplace_back(a, b);
  }

  ModelConfig cfg;
  cfg.embed_dim = static_cast<int>(r.read_u32());
  cfg.blocks = static_cast<int>(r.read_u32());
  cfg.stack_depth = static_cast<int>(r.read_u32());
  cfg.grid_size = static_cast<int>(r.read_u32());
  cfg.spline_order = static_cast<int>(r.read_u32());
  cfg.irc = r.read_u8() != 0;
  bool has_state = r.read_u8() != 0;
  cfg.scaling = r.read_f64();
  cfg.dropout = r.read_f64();
  cfg.spline_lo = r.read_f64();
  cfg.spline_hi = r.read_f64();
  cfg.seed = r.read_u64();

  if (expected) {
    if (expected->embed_dim != cfg.embed_dim || expected->blocks != cfg.blocks ||
        expected->stack_depth != cfg.stack_depth ||
        expected->grid_size != cfg.grid_size ||
        expected->spline_order != cfg.spline_order) {
      throw BadConfigError(
          "load_checkpoint: stored architecture (F=" + std::to_string(cfg.embed_dim) +
          ", blocks=" + std::to_string(cfg.blocks) +
          ") does not match the requested config (F=" +
          std::to_string(expected->embed_dim) +
          ", blocks=" + std::to_string(expected->blocks) + ")");
    }
  }

  PoseKanModel model(SkeletonGraph(joint_count, edges), cfg);
  auto blocks = model.param_blocks();
  std::uint64_t declared = 0;
  for (const auto& block : blocks) declared += block.size;
  std::uint64_t param_count = r.read_u64();
  if (param_count != declared) {
    throw CorruptChecksumError("load_checkpoint: " + path + " declares " +
                               std::to_string(param_count) + " parameters, model has " +
                               std::to_string(declared));
  }
  for (const auto& block : blocks) {
    for (std::size_t i = 0; i < block.size; ++i) block.data[i] = r.read_f64();
  }

  TrainState state;
  if (has_state) {
    state.step = r.read_i64();
    state.epoch = static_cast<int>(r.read_i64());
    state.lr = r.read_f64();
    state.lr0 = r.read_f64();
    state.beta1 = r.read_f64();
    state.beta2 = r.read_f64();
    state.eps = r.read_f64();
    state.decay = r.read_f64();
    state.decay_every = static_cast<int>(r.read_i64());
    state.rng_seed = r.read_u64();
    state.ensure_size(static_cast<Eigen::Index>(param_count));
    for (Eigen::Index i = 0; i < state.m.size(); ++i) state.m(i) = r.read_f64();
    for (Eigen::Index i = 0; i < state.v.size(); ++i) state.v(i) = r.read_f64();
    for (Eigen::Index i = 0; i < state.v_hat.size(); ++i) state.v_hat(i) = r.read_f64();
  }
  if (r.remaining() != 0) {
    throw CorruptChecksumError("load_checkpoint: trailing bytes in " + path);
  }

  return LoadedCheckpoint{std::move(model), std::move(state), has_state};
}

}  // namespace posekan
