#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace signet {

/// Exhaustive Euclidean k-nearest-neighbour classifier. Training points are the
/// columns of `points`.
class KnnModel {
 public:
  KnnModel() = default;
  KnnModel(Eigen::MatrixXd points, std::vector<int> labels, std::size_t k = 3);
  KnnModel(std::span<const Eigen::VectorXd> points, std::span<const int> labels, std::size_t k = 3);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t k() const noexcept { return k_; }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

 private:
  Eigen::MatrixXd points_;
  std::vector<int> labels_;
  std::size_t k_ = 3;
};

/// Majority label of the k nearest training points, with Euclidean distances summed
/// in coordinate order. Distance ties go to the lower training index; label ties go
/// to the smaller mean distance, then the smaller label.
int knn_predict(const KnnModel& model, const Eigen::VectorXd& x);
std::vector<int> knn_predict(const KnnModel& model, std::span<const Eigen::VectorXd> queries);

struct SvmParams {
  double C = 1.0;
  /// RBF width; <= 0 selects 1 / dimension.
  double gamma = 0.0;
  /// Bound on the maximal KKT violation pair m(alpha) - M(alpha).
  double tol = 1e-3;
  /// SMO pair updates before giving up; 0 selects max(100000, 100 n).
  std::size_t max_iter = 0;
};

/// Binary RBF soft-margin SVM. Class 1 maps to y = +1, class 0 to y = -1.
struct SvmModel {
  Eigen::MatrixXd points;  // d x n training points
  Eigen::VectorXd y;       // +-1
  Eigen::VectorXd alpha;   // dual coefficients in [0, C]
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double tol = 1e-3;
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
  std::size_t support_count() const;
  /// sum_i alpha_i y_i K(x_i, x) + b
  double decision(const Eigen::VectorXd& x) const;
};

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);

/// SMO with second-order working-set selection on a precomputed kernel matrix.
/// Non-convergence within the iteration budget leaves `converged` false and
/// returns the last iterate. Throws PreconditionError unless both classes occur.
SvmModel svm_train(std::span<const Eigen::VectorXd> points, std::span<const int> labels,
                   const SvmParams& params = {});

/// Class of sign(decision); a decision value of exactly 0 maps to class 0.
int svm_predict(const SvmModel& model, const Eigen::VectorXd& x);
std::vector<int> svm_predict(const SvmModel& model, std::span<const Eigen::VectorXd> queries);

}  // namespace signet
