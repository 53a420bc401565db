#pragma once

#include <Eigen/Dense>
#include <vector>

namespace posekan {

/// Mean per-joint position error: average Euclidean distance over all
/// N*J (prediction, ground-truth) joint pairs. Units follow the data (mm for
/// the shipped formats).
double mpjpe(const std::vector<Eigen::MatrixXd>& pred,
             const std::vector<Eigen::MatrixXd>& gt);

/// Similarity transform y ~ scale * R * x + t.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
};

/// Least-squares similarity alignment of `source` onto `target` (rotation
/// restricted to det +1 via SVD sign correction, uniform scale, translation).
/// Throws DegenerateConfiguration when the cross-covariance is rank-deficient
/// (collinear points) or the source cloud has no spread.
SimilarityTransform procrustes_align(const Eigen::MatrixXd& source,
                                     const Eigen::MatrixXd& target);

struct PaMpjpeResult {
  double value = 0.0;
  int skipped = 0;  // degenerate samples excluded from the mean
};

/// Procrustes-aligned MPJPE: each prediction is optimally aligned to its
/// ground truth before the per-joint error is measured.
PaMpjpeResult pa_mpjpe(const std::vector<Eigen::MatrixXd>& pred,
                       const std::vector<Eigen::MatrixXd>& gt);

struct PckAucResult {
  double pck = 0.0;  // percent of joints under the threshold
  double auc = 0.0;  // mean PCK over the threshold sweep
};

struct AucRange {
  double lo = 5.0;
  double hi = 150.0;
  double step = 5.0;
};

/// PCK at `threshold_mm` (error strictly below the threshold counts as
/// correct) and AUC as the mean PCK over the 5..150mm sweep, following the
/// MPI-INF-3DHP convention.
PckAucResult pck_auc(const std::vector<Eigen::MatrixXd>& pred,
                     const std::vector<Eigen::MatrixXd>& gt,
                     double threshold_mm = 150.0, AucRange range = {});

}  // namespace posekan
