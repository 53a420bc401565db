#include "posekan/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "posekan/errors.hpp"

namespace posekan {

SkeletonGraph::SkeletonGraph(int joint_count,
                             const std::vector<std::pair<int, int>>& edges)
    : joint_count_(joint_count), edges_(edges) {
  if (joint_count < 1) {
    throw BadDimensionsError("SkeletonGraph: joint_count must be >= 1");
  }
  if (edges.empty()) {
    throw BadDimensionsError("SkeletonGraph: edge list is empty");
  }

  adjacency_ = Eigen::MatrixXd::Zero(joint_count, joint_count);
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= joint_count || b < 0 || b >= joint_count) {
      throw IndexOutOfRangeError("SkeletonGraph: edge (" + std::to_string(a) +
                                 ", " + std::to_string(b) +
                                 ") outside [0, " + std::to_string(joint_count) + ")");
    }
    if (a == b) {
      throw SelfLoopError("SkeletonGraph: self-loop at joint " + std::to_string(a));
    }
    adjacency_(a, b) = 1.0;
    adjacency_(b, a) = 1.0;
  }

  Eigen::VectorXd degrees = adjacency_.rowwise().sum();
  for (int j = 0; j < joint_count; ++j) {
    if (degrees(j) == 0.0) {
      throw IsolatedJointError("SkeletonGraph: joint " + std::to_string(j) +
                               " has degree 0");
    }
  }

  // D^{-1/2} A D^{-1/2}, entry-wise so symmetry is exact.
  Eigen::VectorXd inv_sqrt_deg = degrees.array().sqrt().inverse();
  norm_adjacency_ = Eigen::MatrixXd::Zero(joint_count, joint_count);
  for (int i = 0; i < joint_count; ++i) {
    for (int j = i + 1; j < joint_count; ++j) {
      if (adjacency_(i, j) != 0.0) {
        double v = inv_sqrt_deg(i) * inv_sqrt_deg(j);
        norm_adjacency_(i, j) = v;
        norm_adjacency_(j, i) = v;
      }
    }
  }

  laplacian_ = Eigen::MatrixXd::Identity(joint_count, joint_count) - norm_adjacency_;
}

SkeletonGraph load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("load_skeleton: cannot open " + path);
  }

  int joint_count = -1;
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;  // blank line

    std::string eq;
    if (key == "joints") {
      if (!(ls >> eq >> joint_count) || eq != "=") {
        throw ParseError("load_skeleton: " + path + ":" + std::to_string(line_no) +
                         ": expected 'joints = <J>'");
      }
    } else if (key == "edge") {
      int a = 0, b = 0;
      if (!(ls >> eq >> a >> b) || eq != "=") {
        throw ParseError("load_skeleton: " + path + ":" + std::to_string(line_no) +
                         ": expected 'edge = <i> <j>'");
      }
      edges.emplace_back(a, b);
    } else {
      throw ParseError("load_skeleton: " + path + ":" + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
  if (joint_count < 0) {
    throw ParseError("load_skeleton: " + path + ": missing 'joints = <J>' line");
  }
  return SkeletonGraph(joint_count, edges);
}

PropagationMatrix::PropagationMatrix(const SkeletonGraph& graph, double scaling)
    : norm_adjacency_(graph.normalized_adjacency()), scaling_(scaling) {
  if (scaling < 0.0 || scaling > 1.0) {
    throw ScalingOutOfRangeError("PropagationMatrix: scaling " +
                                 std::to_string(scaling) + " outside [0, 1]");
  }
  matrix_ = (1.0 - scaling) * norm_adjacency_ +
            scaling * (norm_adjacency_ * norm_adjacency_);
}

Eigen::MatrixXd PropagationMatrix::apply(const Eigen::MatrixXd& h) const {
  if (h.rows() != norm_adjacency_.rows()) {
    throw ShapeMismatchError("PropagationMatrix::apply: H has " +
                             std::to_string(h.rows()) + " rows, graph has " +
                             std::to_string(norm_adjacency_.rows()) + " joints");
  }
  Eigen::MatrixXd ah = norm_adjacency_ * h;
  return (1.0 - scaling_) * ah + scaling_ * (norm_adjacency_ * ah);
}

Eigen::MatrixXd PropagationMatrix::apply(const Eigen::MatrixXd& h,
                                         const Eigen::MatrixXd& x) const {
  if (h.rows() != x.rows() || h.cols() != x.cols()) {
    throw ShapeMismatchError("PropagationMatrix::apply: H and X shapes differ");
  }
  Eigen::MatrixXd out = apply(h);
  out += x;
  return out;
}

SpectralFilter::SpectralFilter(double scaling) : scaling_(scaling) {
  if (!(scaling > 0.0 && scaling < 1.0)) {
    throw ScalingOutOfRangeError("SpectralFilter: scaling " +
                                 std::to_string(scaling) + " outside (0, 1)");
  }
}

double SpectralFilter::response(double lambda) const {
  double denom = (1.0 + scaling_) * lambda - scaling_ * lambda * lambda;
  if (std::abs(denom) < 1e-12) {
    throw SingularFrequencyError("SpectralFilter: response undefined at lambda = " +
                                 std::to_string(lambda));
  }
  return 1.0 / denom;
}

Eigen::MatrixXd fixed_point_step(const SkeletonGraph& graph, double scaling,
                                 const Eigen::MatrixXd& h, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd& a_hat = graph.normalized_adjacency();
  if (h.rows() != a_hat.rows() || x.rows() != a_hat.rows() || h.cols() != x.cols()) {
    throw ShapeMismatchError("fixed_point_step: inconsistent shapes");
  }
  Eigen::MatrixXd ah = a_hat * h;
  return (1.0 - scaling) * ah + scaling * (a_hat * ah) + x;
}

FilterIdentityReport verify_filter_identities(const SkeletonGraph& graph,
                                              double scaling, double tolerance) {
  FilterIdentityReport report;
  report.tolerance = tolerance;

  const int n = graph.joint_count();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& a_hat = graph.normalized_adjacency();
  const Eigen::MatrixXd& lap = graph.laplacian();

  Eigen::MatrixXd factored = (identity - scaling * lap) * (identity - lap);
  Eigen::MatrixXd expanded =
      identity - (1.0 + scaling) * lap + scaling * (lap * lap);
  Eigen::MatrixXd adjacency_form =
      ((1.0 - scaling) * identity + scaling * a_hat) * a_hat;

  auto add_row = [&](const std::string& name, double residual) {
    report.rows.push_back({name, residual, residual <= tolerance});
  };

  add_row("(I-sL)(I-L) == I-(1+s)L+sL^2", (factored - expanded).norm());
  add_row("(I-sL)(I-L) == ((1-s)I+sA)A", (factored - adjacency_form).norm());

  // Eigen-based oracle: P acts on each eigenvector of A_hat by the scalar
  // polynomial (1-s)mu + s mu^2.
  PropagationMatrix prop(graph, scaling);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a_hat);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double mu = solver.eigenvalues()(i);
    Eigen::VectorXd v = solver.eigenvectors().col(i);
    double expected = (1.0 - scaling) * mu + scaling * mu * mu;
    double residual = (prop.matrix() * v - expected * v).norm() / v.norm();
    worst = std::max(worst, residual);
  }
  add_row("P v == ((1-s)mu+s mu^2) v (all eigenpairs)", worst);

  return report;
}

}  // namespace posekan
