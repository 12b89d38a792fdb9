#include "mrgap/local_geometry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mrgap {

namespace {

constexpr double kSymmetryTol = 1e-10;

// Largest-magnitude entry of every column made positive.
void fix_signs(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

void check_intrinsic_dim(std::size_t d, std::size_t ambient) {
  if (d < 1 || d >= ambient)
    throw InputError("intrinsic dimension " + std::to_string(d) + " must satisfy 1 <= d < " +
                     std::to_string(ambient));
}

// Displacements y_i - y_k of the epsilon-ball members other than y_k.
Matrix ball_displacements(const PointCloud& cloud, std::size_t k, double epsilon) {
  const auto& m = cloud.matrix();
  const auto base = m.row(static_cast<Eigen::Index>(k));
  const double e2 = epsilon * epsilon;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (static_cast<std::size_t>(i) == k) continue;
    if ((m.row(i) - base).squaredNorm() <= e2) rows.push_back(i);
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]) - base;
  return x;
}

// Frame for a covariance of rank < D built from its few displacement rows:
// eigenpairs from the small Gram matrix, null space completed by Householder QR.
LocalFrame low_rank_frame(const Matrix& displacements, double n, const Vector& base, std::size_t d) {
  const Eigen::Index dim = base.size();
  const Matrix gram = displacements * displacements.transpose() / n;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on local Gram matrix");
  const Vector gvals = solver.eigenvalues();  // ascending
  const double top = gvals.size() ? std::max(gvals.maxCoeff(), 0.0) : 0.0;

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = gvals.size() - 1; i >= 0; --i)
    if (gvals(i) > top * 1e-12 && gvals(i) > 0.0) kept.push_back(i);

  const Eigen::Index r = static_cast<Eigen::Index>(kept.size());
  Matrix lead(dim, r);
  Vector values = Vector::Zero(dim);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index i = kept[static_cast<std::size_t>(c)];
    lead.col(c) = displacements.transpose() * solver.eigenvectors().col(i) / std::sqrt(n * gvals(i));
    values(c) = gvals(i);
  }
  // Re-orthonormalize (modified Gram-Schmidt) against round-off.
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index p = 0; p < c; ++p) lead.col(c) -= lead.col(p).dot(lead.col(c)) * lead.col(p);
    lead.col(c).normalize();
  }

  Matrix basis(dim, dim);
  basis.leftCols(r) = lead;
  if (r < dim) {
    Matrix q = Matrix::Identity(dim, dim);
    if (r > 0) {
      Eigen::HouseholderQR<Matrix> qr(lead);
      q = qr.householderQ() * Matrix::Identity(dim, dim);
    }
    basis.rightCols(dim - r) = q.rightCols(dim - r);
  }
  fix_signs(basis);
  return {base, std::move(basis), std::move(values), d};
}

}  // namespace

Vector LocalFrame::lift(const Eigen::Ref<const Vector>& tangent_coords,
                        const Eigen::Ref<const Vector>& normal_coords) const {
  return base + tangent() * tangent_coords + normal() * normal_coords;
}

Matrix local_covariance(const PointCloud& cloud, std::size_t k, double epsilon) {
  if (k >= cloud.size()) throw InputError("index " + std::to_string(k) + " out of range");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const Matrix x = ball_displacements(cloud, k, epsilon);
  Matrix c = x.transpose() * x / static_cast<double>(cloud.size());
  return (c + c.transpose()) * 0.5;
}

LocalFrame eigen_frame(const Eigen::Ref<const Matrix>& covariance, const Eigen::Ref<const Vector>& base,
                       std::size_t intrinsic_dim) {
  const Eigen::Index dim = covariance.rows();
  if (covariance.cols() != dim || base.size() != dim) throw InputError("eigen_frame: dimension mismatch");
  check_intrinsic_dim(intrinsic_dim, static_cast<std::size_t>(dim));
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw InputError("eigen_frame: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on local covariance");
  Vector values = solver.eigenvalues().reverse();
  Matrix basis = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) < 0.0) values(i) = 0.0;
  fix_signs(basis);
  return {base, std::move(basis), std::move(values), intrinsic_dim};
}

Vector project_tangent(const LocalFrame& frame, const Eigen::Ref<const Vector>& y) {
  if (y.size() != frame.base.size()) throw InputError("project_tangent: dimension mismatch");
  return frame.tangent().transpose() * (y - frame.base);
}

Vector project_normal(const LocalFrame& frame, const Eigen::Ref<const Vector>& y) {
  if (y.size() != frame.base.size()) throw InputError("project_normal: dimension mismatch");
  return frame.normal().transpose() * (y - frame.base);
}

std::size_t covariance_ball_count(const PointCloud& cloud, std::size_t k, double epsilon) {
  return radius_neighbors(cloud, k, epsilon, true).size();
}

LocalFrame local_frame(const PointCloud& cloud, std::size_t k, double epsilon, std::size_t intrinsic_dim) {
  if (k >= cloud.size()) throw InputError("index " + std::to_string(k) + " out of range");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  check_intrinsic_dim(intrinsic_dim, cloud.ambient_dim());
  const Vector base = cloud.point(k).transpose();
  const Matrix x = ball_displacements(cloud, k, epsilon);
  const auto dim = static_cast<Eigen::Index>(cloud.ambient_dim());
  if (dim >= kLowRankMinDim && 2 * x.rows() < dim)
    return low_rank_frame(x, static_cast<double>(cloud.size()), base, intrinsic_dim);
  Matrix c = x.transpose() * x / static_cast<double>(cloud.size());
  c = (c + c.transpose()) * 0.5;
  return eigen_frame(c, base, intrinsic_dim);
}

ChartRegression build_chart_data(const PointCloud& cloud, std::size_t k, double epsilon, double delta,
                                 std::size_t intrinsic_dim) {
  if (k >= cloud.size()) throw InputError("index " + std::to_string(k) + " out of range");
  if (!(epsilon > 0.0) || !(delta > 0.0)) throw InputError("epsilon and delta must be positive");
  if (delta <= epsilon)
    warn("delta (" + std::to_string(delta) + ") should exceed epsilon (" + std::to_string(epsilon) + ")");
  const std::size_t ball = covariance_ball_count(cloud, k, epsilon);
  if (ball <= intrinsic_dim) throw InsufficientNeighborsError(k, ball, intrinsic_dim);

  return assemble_chart(cloud, k, local_frame(cloud, k, epsilon, intrinsic_dim), delta);
}

ChartRegression assemble_chart(const PointCloud& cloud, std::size_t k, LocalFrame frame, double delta) {
  ChartRegression chart;
  chart.frame = std::move(frame);
  chart.member_indices = radius_neighbors(cloud, k, delta, true).indices;

  const auto members = static_cast<Eigen::Index>(chart.member_indices.size());
  Matrix disp(static_cast<Eigen::Index>(cloud.ambient_dim()), members);
  for (Eigen::Index j = 0; j < members; ++j)
    disp.col(j) = cloud.point(chart.member_indices[static_cast<std::size_t>(j)]).transpose() - chart.frame.base;
  chart.predictors = (chart.frame.tangent().transpose() * disp).transpose();
  chart.responses = (chart.frame.normal().transpose() * disp).transpose();
  return chart;
}

}  // namespace mrgap
