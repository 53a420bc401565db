#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "posekan/graph.hpp"

namespace posekan {

/// One training pair: normalized 2D keypoints and a root-centered 3D target.
/// Joint 0 is the root (hip) by convention; its 3D row is exactly zero.
struct PoseSample {
  Eigen::MatrixXd input_2d;   // J x 2
  Eigen::MatrixXd target_3d;  // J x 3
  std::string action_label;   // empty when absent
  std::string subject_id;     // empty when absent
};

struct NormalizationMeta {
  double image_w = 0.0;
  double image_h = 0.0;
  bool applied = false;
};

class Dataset {
 public:
  Dataset(std::vector<PoseSample> samples, int joint_count,
          NormalizationMeta meta = {});

  const std::vector<PoseSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int joint_count() const { return joint_count_; }
  const NormalizationMeta& normalization_meta() const { return meta_; }
  const PoseSample& operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<PoseSample> samples_;
  int joint_count_;
  NormalizationMeta meta_;
};

/// Loads a dataset in either the text format (one `sample ...` record per
/// line) or the binary PKDS format, decided by the file's leading bytes.
/// Targets are root-centered on ingestion if they are not already.
Dataset load_dataset(const std::string& path, const SkeletonGraph& skeleton);

/// Text twin: `sample <id> [action=<a>] [subject=<s>] | x2d: ... | y3d: ...`
/// with round-trip-exact decimal reals.
void save_dataset_text(const Dataset& dataset, const std::string& path);

/// Binary twin: magic "PKDS", u32 version, u32 N, u32 J, then per sample
/// J*2 + J*3 little-endian doubles.
void save_dataset_binary(const Dataset& dataset, const std::string& path);

/// Maps pixel coordinates to [-1, 1]^2 preserving aspect ratio:
/// x' = (2x - w) / w, y' = (2y - h) / w (shared divisor w).
Eigen::MatrixXd normalize_2d(const Eigen::MatrixXd& raw_pixels, double image_w,
                             double image_h);
Eigen::MatrixXd denormalize_2d(const Eigen::MatrixXd& normalized, double image_w,
                               double image_h);

namespace synth {
/// Fixed camera for the synthetic task: the skeleton root sits at
/// (0, 0, kRootDepth) and a joint at world position (X, Y, Z) projects to
/// (kFocal * X / Z, kFocal * Y / Z). Units are normalized pose scale (bones
/// are O(0.2)), not millimeters; the metrics are scale-relative.
constexpr double kRootDepth = 10.0;
constexpr double kFocal = 4.0;

/// Deterministic per-edge bone length shared by all samples.
double bone_length(int edge_index);
}  // namespace synth

/// Desk-scale synthetic lifting task: random kinematic-chain poses with the
/// skeleton's topology and fixed bone lengths, projected by the fixed
/// perspective camera above, root-centered. Deterministic per seed.
Dataset make_synthetic_task(const SkeletonGraph& skeleton, int n_samples,
                            std::uint64_t seed);

}  // namespace posekan
