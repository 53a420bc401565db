#pragma once

#include <string>

#include "posekan/model.hpp"
#include "posekan/optimizer.hpp"

namespace posekan {

struct LoadedCheckpoint {
  PoseKanModel model;
  TrainState state;
  bool has_state = false;
};

/// Binary checkpoint, documented byte-exactly in the README: magic "PKAN",
/// u32 version, little-endian config block (graph topology included, so the
/// file is self-contained), all parameter tensors in declaration order as
/// 64-bit floats (column-major within each tensor), optional optimizer state,
/// trailing CRC-32 over everything before it.
void save_checkpoint(const PoseKanModel& model, const TrainState* state,
                     const std::string& path);

/// Loads and verifies a checkpoint. When `expected` is supplied, any
/// shape-affecting mismatch (embed_dim, blocks, stack depth, grid, order)
/// raises BadConfig.
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 const ModelConfig* expected = nullptr);

}  // namespace posekan
