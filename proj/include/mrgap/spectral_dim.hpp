#pragma once

#include "mrgap/point_cloud.hpp"

#include <vector>

namespace mrgap {

/// Density-normalized diffusion-map Laplacian L = (D^-1 W - I) / eps^2 with
/// W_ij = k_ij / (q_i q_j), k_ij = exp(-|y_i - y_j|^2 / eps^2), q_i = sum_j k_ij.
/// The symmetric W and the degrees D_ii are kept for the eigensolver.
struct GraphLaplacian {
  Matrix laplacian;
  Matrix weights;
  Vector degrees;
  double eps_dm = 1.0;
};

GraphLaplacian graph_laplacian(const PointCloud& cloud, double eps_dm);

/// Leading eigenpairs of -L: mu ascending (mu_0 = 0), eigenvectors of unit
/// l2 norm with their largest-magnitude entry positive.
struct DiffusionSpectrum {
  Vector eigenvalues;
  Matrix eigenvectors;  ///< n x (ell + 1), column j pairs with eigenvalues(j)
};

/// Solved through the symmetric conjugate D^-1/2 W D^-1/2 and back-transformed.
DiffusionSpectrum diffusion_embedding(const GraphLaplacian& graph, std::size_t ell);

/// Diffusion coordinates (V_1, ..., V_ell) as a cloud in R^ell. With
/// scale_by_sqrt_n each coordinate is multiplied by sqrt(n), i.e. normalized
/// to unit mean square instead of unit l2 norm.
PointCloud diffusion_coordinates(const DiffusionSpectrum& spectrum, std::size_t ell, bool scale_by_sqrt_n = true);

/// Mean over all points of the descending eigenvalues of the local covariance.
Vector mean_local_eigenvalues(const PointCloud& cloud, double epsilon);

inline constexpr double kDefaultGapFloor = 0.1;

/// Index i (1-based) maximizing max(lambda_i, f) / max(lambda_{i+1}, f) with
/// f = relative_floor * lambda_1, so eigenvalues below the floor count as one
/// flat tail. Returns 0 for an all-zero profile.
std::size_t spectral_gap_dimension(const Eigen::Ref<const Vector>& lambda_bar,
                                   double relative_floor = kDefaultGapFloor);

struct DimensionProfile {
  struct Entry {
    std::size_t embed_dim = 0;
    double epsilon = 0.0;
    Vector lambda_bar;
    std::size_t vote = 0;
  };
  std::vector<Entry> entries;
  std::size_t estimated_dim = 0;
};

struct DimensionOptions {
  double eps_dm = 2.0;
  std::vector<std::size_t> embed_dims{3, 4, 5, 6};
  /// Local covariance bandwidths; empty means 0.3 + 0.1 j paired with the
  /// j-th embedding dimension (j = 1, 2, ...).
  std::vector<double> eps_grid;
  bool scale_by_sqrt_n = true;
  double gap_floor = kDefaultGapFloor;
};

/// Re-embeds the cloud by diffusion coordinates for every embedding dimension,
/// measures mean local eigenvalues for every bandwidth (or the paired default),
/// and majority-votes the spectral-gap index. Ties go to the smaller dimension.
DimensionProfile estimate_dimension(const PointCloud& cloud, const DimensionOptions& options = {});

}  // namespace mrgap
