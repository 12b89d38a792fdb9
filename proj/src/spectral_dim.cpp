#include "mrgap/spectral_dim.hpp"

#include "mrgap/local_geometry.hpp"
#include "mrgap/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>

namespace mrgap {

GraphLaplacian graph_laplacian(const PointCloud& cloud, double eps_dm) {
  if (cloud.size() < 2) throw InputError("graph Laplacian needs at least two points");
  if (!(eps_dm > 0.0)) throw InputError("diffusion bandwidth must be positive");
  const auto n = static_cast<Eigen::Index>(cloud.size());
  const auto& y = cloud.matrix();
  const double e2 = eps_dm * eps_dm;

  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-(y.row(i) - y.row(j)).squaredNorm() / e2);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const Vector q = k.rowwise().sum();
  GraphLaplacian g;
  g.eps_dm = eps_dm;
  g.weights.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g.weights(i, j) = k(i, j) / (q(i) * q(j));
  g.degrees = g.weights.rowwise().sum();
  g.laplacian = g.degrees.cwiseInverse().asDiagonal() * g.weights;
  g.laplacian.diagonal().array() -= 1.0;
  g.laplacian /= e2;
  return g;
}

DiffusionSpectrum diffusion_embedding(const GraphLaplacian& graph, std::size_t ell) {
  const Eigen::Index n = graph.weights.rows();
  if (static_cast<Eigen::Index>(ell) >= n) throw InputError("embedding dimension must be below the sample size");
  const Vector inv_sqrt = graph.degrees.cwiseSqrt().cwiseInverse();
  Matrix s = inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal();
  s = (s + s.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) throw NumericalError("diffusion-map eigensolver failed");

  const auto count = static_cast<Eigen::Index>(ell) + 1;
  DiffusionSpectrum out;
  out.eigenvalues.resize(count);
  out.eigenvectors.resize(n, count);
  const double e2 = graph.eps_dm * graph.eps_dm;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index src = n - 1 - j;  // largest eigenvalue of the conjugate first
    out.eigenvalues(j) = std::max(0.0, (1.0 - solver.eigenvalues()(src)) / e2);
    Vector v = inv_sqrt.cwiseProduct(solver.eigenvectors().col(src));
    v.normalize();
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.eigenvectors.col(j) = v;
  }
  return out;
}

PointCloud diffusion_coordinates(const DiffusionSpectrum& spectrum, std::size_t ell, bool scale_by_sqrt_n) {
  if (ell < 1 || static_cast<Eigen::Index>(ell) >= spectrum.eigenvectors.cols())
    throw InputError("requested diffusion coordinates exceed the computed spectrum");
  RowMatrix coords = spectrum.eigenvectors.middleCols(1, static_cast<Eigen::Index>(ell));
  if (scale_by_sqrt_n) coords *= std::sqrt(static_cast<double>(coords.rows()));
  return PointCloud(std::move(coords));
}

Vector mean_local_eigenvalues(const PointCloud& cloud, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (cloud.empty()) throw InputError("mean local eigenvalues of an empty cloud");
  const std::size_t n = cloud.size();
  std::vector<Vector> per_point(n);
  parallel_for(n, [&](std::size_t k) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(local_covariance(cloud, k, epsilon), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on local covariance");
    per_point[k] = solver.eigenvalues().reverse().cwiseMax(0.0);
  });
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(cloud.ambient_dim()));
  for (const auto& v : per_point) mean += v;
  return mean / static_cast<double>(n);
}

std::size_t spectral_gap_dimension(const Eigen::Ref<const Vector>& lambda_bar, double relative_floor) {
  if (!(relative_floor > 0.0) || relative_floor >= 1.0) throw InputError("gap floor must lie in (0, 1)");
  if (lambda_bar.size() < 2 || !(lambda_bar(0) > 0.0)) return 0;
  const double floor = relative_floor * lambda_bar(0);
  std::size_t best = 1;
  double best_ratio = -1.0;
  for (Eigen::Index i = 0; i + 1 < lambda_bar.size(); ++i) {
    const double ratio = std::max(lambda_bar(i), floor) / std::max(lambda_bar(i + 1), floor);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<std::size_t>(i) + 1;
    }
  }
  return best;
}

DimensionProfile estimate_dimension(const PointCloud& cloud, const DimensionOptions& options) {
  if (options.embed_dims.empty()) throw InputError("embedding dimension list is empty");
  for (double e : options.eps_grid)
    if (!(e > 0.0)) throw InputError("local bandwidths must be positive");
  if (!(options.gap_floor > 0.0) || options.gap_floor >= 1.0) throw InputError("gap floor must lie in (0, 1)");
  const std::size_t max_dim = *std::max_element(options.embed_dims.begin(), options.embed_dims.end());
  if (*std::min_element(options.embed_dims.begin(), options.embed_dims.end()) < 2)
    throw InputError("embedding dimensions must be >= 2");

  const DiffusionSpectrum spectrum = diffusion_embedding(graph_laplacian(cloud, options.eps_dm), max_dim);
  DimensionProfile profile;
  for (std::size_t j = 0; j < options.embed_dims.size(); ++j) {
    const std::size_t ell = options.embed_dims[j];
    const PointCloud embedded = diffusion_coordinates(spectrum, ell, options.scale_by_sqrt_n);
    std::vector<double> bandwidths = options.eps_grid;
    if (bandwidths.empty()) bandwidths.push_back(0.3 + 0.1 * static_cast<double>(j + 1));
    for (double eps : bandwidths) {
      DimensionProfile::Entry e;
      e.embed_dim = ell;
      e.epsilon = eps;
      e.lambda_bar = mean_local_eigenvalues(embedded, eps);
      e.vote = spectral_gap_dimension(e.lambda_bar, options.gap_floor);
      profile.entries.push_back(std::move(e));
    }
  }
  std::map<std::size_t, std::size_t> tally;
  for (const auto& e : profile.entries)
    if (e.vote > 0) ++tally[e.vote];
  std::size_t best_count = 0;
  for (const auto& [dim, count] : tally)
    if (count > best_count) {
      best_count = count;
      profile.estimated_dim = dim;
    }
  return profile;
}

}  // namespace mrgap
