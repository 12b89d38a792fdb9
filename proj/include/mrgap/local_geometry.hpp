#pragma once

#include "mrgap/neighborhood.hpp"
#include "mrgap/point_cloud.hpp"

#include <vector>

namespace mrgap {

/// Eigen-frame of a local covariance matrix at a base point. Columns of basis
/// are eigenvectors ordered by nonincreasing eigenvalue; the first
/// intrinsic_dim columns span the estimated tangent space and the rest the
/// normal space.
struct LocalFrame {
  Vector base;
  Matrix basis;
  Vector eigenvalues;
  std::size_t intrinsic_dim = 1;

  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(base.size()); }
  std::size_t codim() const noexcept { return ambient_dim() - intrinsic_dim; }
  auto tangent() const { return basis.leftCols(static_cast<Eigen::Index>(intrinsic_dim)); }
  auto normal() const { return basis.rightCols(static_cast<Eigen::Index>(codim())); }

  /// base + basis * [tangent; normal].
  Vector lift(const Eigen::Ref<const Vector>& tangent_coords, const Eigen::Ref<const Vector>& normal_coords) const;
};

/// One chart's regression problem: predictors are tangent coordinates, responses
/// normal coordinates, of every point in the delta-ball around the base.
struct ChartRegression {
  LocalFrame frame;
  Matrix predictors;  ///< N x d
  Matrix responses;   ///< N x (D - d)
  std::vector<std::size_t> member_indices;

  std::size_t size() const noexcept { return static_cast<std::size_t>(predictors.rows()); }
};

/// (1/n) sum_i (y_i - y_k)(y_i - y_k)^T over points with ||y_i - y_k|| <= epsilon.
Matrix local_covariance(const PointCloud& cloud, std::size_t k, double epsilon);

/// Full symmetric eigendecomposition with descending eigenvalues (tiny negative
/// values clamped to zero) and each eigenvector signed so its largest-magnitude
/// entry is positive.
LocalFrame eigen_frame(const Eigen::Ref<const Matrix>& covariance, const Eigen::Ref<const Vector>& base,
                       std::size_t intrinsic_dim);

/// Frame at cloud point k from its epsilon-ball. Equivalent to
/// eigen_frame(local_covariance(...)); for wide data (D >= kLowRankMinDim and
/// fewer than D/2 neighbors) the rank-deficient covariance is decomposed through
/// the small Gram matrix of displacements instead.
inline constexpr Eigen::Index kLowRankMinDim = 32;
LocalFrame local_frame(const PointCloud& cloud, std::size_t k, double epsilon, std::size_t intrinsic_dim);

Vector project_tangent(const LocalFrame& frame, const Eigen::Ref<const Vector>& y);
Vector project_normal(const LocalFrame& frame, const Eigen::Ref<const Vector>& y);

/// Frame at y_k from the epsilon-ball covariance, plus tangent/normal
/// coordinates of every delta-neighbor of y_k (y_k included). Throws
/// InsufficientNeighborsError when the epsilon-ball holds <= d points.
ChartRegression build_chart_data(const PointCloud& cloud, std::size_t k, double epsilon, double delta,
                                 std::size_t intrinsic_dim);

/// Chart of cloud point k for an already computed frame: tangent and normal
/// coordinates of every point within delta of y_k.
ChartRegression assemble_chart(const PointCloud& cloud, std::size_t k, LocalFrame frame, double delta);

/// Number of cloud points within epsilon of y_k, y_k included.
std::size_t covariance_ball_count(const PointCloud& cloud, std::size_t k, double epsilon);

}  // namespace mrgap
