#include "posekan/metrics.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "posekan/errors.hpp"

namespace posekan {

namespace {

void require_matching(const std::vector<Eigen::MatrixXd>& pred,
                      const std::vector<Eigen::MatrixXd>& gt, const char* what) {
  if (pred.size() != gt.size()) {
    throw ShapeMismatchError(std::string(what) + ": sample counts differ");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].rows() != gt[i].rows() || pred[i].cols() != 3 || gt[i].cols() != 3) {
      throw ShapeMismatchError(std::string(what) + ": sample " + std::to_string(i) +
                               " shapes differ or are not Jx3");
    }
  }
}

}  // namespace

double mpjpe(const std::vector<Eigen::MatrixXd>& pred,
             const std::vector<Eigen::MatrixXd>& gt) {
  require_matching(pred, gt, "mpjpe");
  double sum = 0.0;
  std::size_t joints = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (Eigen::Index j = 0; j < pred[i].rows(); ++j) {
      sum += (pred[i].row(j) - gt[i].row(j)).norm();
      ++joints;
    }
  }
  if (joints == 0) throw ShapeMismatchError("mpjpe: empty input");
  return sum / static_cast<double>(joints);
}

Eigen::MatrixXd SimilarityTransform::apply(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd out = scale * (points * rotation.transpose());
  out.rowwise() += translation.transpose();
  return out;
}

SimilarityTransform procrustes_align(const Eigen::MatrixXd& source,
                                     const Eigen::MatrixXd& target) {
  if (source.rows() != target.rows() || source.cols() != 3 || target.cols() != 3) {
    throw ShapeMismatchError("procrustes_align: point sets must share Jx3 shape");
  }
  if (source.rows() < 3) {
    throw DegenerateConfigurationError("procrustes_align: needs at least 3 points");
  }

  Eigen::RowVector3d source_centroid = source.colwise().mean();
  Eigen::RowVector3d target_centroid = target.colwise().mean();
  Eigen::MatrixXd source_centered = source.rowwise() - source_centroid;
  Eigen::MatrixXd target_centered = target.rowwise() - target_centroid;

  double source_var = source_centered.squaredNorm();
  Eigen::Matrix3d cross = source_centered.transpose() * target_centered;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sigma = svd.singularValues();
  if (source_var <= 1e-12 || sigma(1) <= 1e-12 * std::max(sigma(0), 1e-300)) {
    throw DegenerateConfigurationError(
        "procrustes_align: rank-deficient cross-covariance");
  }

  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d signs(1.0, 1.0, 1.0);
  if ((v * u.transpose()).determinant() < 0.0) {
    signs(2) = -1.0;
  }

  SimilarityTransform transform;
  transform.rotation = v * signs.asDiagonal() * u.transpose();
  transform.scale = sigma.dot(signs) / source_var;
  transform.translation =
      target_centroid.transpose() -
      transform.scale * transform.rotation * source_centroid.transpose();
  return transform;
}

PaMpjpeResult pa_mpjpe(const std::vector<Eigen::MatrixXd>& pred,
                       const std::vector<Eigen::MatrixXd>& gt) {
  require_matching(pred, gt, "pa_mpjpe");
  PaMpjpeResult result;
  double sum = 0.0;
  std::size_t joints = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    SimilarityTransform transform;
    try {
      transform = procrustes_align(pred[i], gt[i]);
    } catch (const DegenerateConfigurationError& e) {
      std::cerr << "pa_mpjpe: skipping degenerate sample " << i << ": " << e.what()
                << "\n";
      ++result.skipped;
      continue;
    }
    Eigen::MatrixXd aligned = transform.apply(pred[i]);
    for (Eigen::Index j = 0; j < aligned.rows(); ++j) {
      sum += (aligned.row(j) - gt[i].row(j)).norm();
      ++joints;
    }
  }
  if (joints == 0) {
    throw DegenerateConfigurationError("pa_mpjpe: every sample was degenerate");
  }
  result.value = sum / static_cast<double>(joints);
  return result;
}

PckAucResult pck_auc(const std::vector<Eigen::MatrixXd>& pred,
                     const std::vector<Eigen::MatrixXd>& gt, double threshold_mm,
                     AucRange range) {
  require_matching(pred, gt, "pck_auc");
  std::vector<double> errors;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (Eigen::Index j = 0; j < pred[i].rows(); ++j) {
      errors.push_back((pred[i].row(j) - gt[i].row(j)).norm());
    }
  }
  if (errors.empty()) throw ShapeMismatchError("pck_auc: empty input");

  auto pck_at = [&](double thr) {
    std::size_t hits = 0;
    for (double e : errors) {
      if (e < thr) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(errors.size());
  };

  PckAucResult result;
  result.pck = pck_at(threshold_mm);
  double sum = 0.0;
  int count = 0;
  for (double thr = range.lo; thr <= range.hi + 1e-9; thr += range.step) {
    sum += pck_at(thr);
    ++count;
  }
  result.auc = sum / static_cast<double>(count);
  return result;
}

}  // namespace posekan
