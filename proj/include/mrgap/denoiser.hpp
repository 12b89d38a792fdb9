#pragma once

#include "mrgap/gp.hpp"
#include "mrgap/local_geometry.hpp"
#include "mrgap/point_cloud.hpp"

#include <optional>
#include <vector>

namespace mrgap {

struct DenoiseConfig {
  double epsilon = 0.3;   ///< local covariance bandwidth
  double delta = 0.6;     ///< chart radius, expected > epsilon
  std::size_t intrinsic_dim = 1;
  std::size_t max_iter = 2;
  /// Absolute stopping tolerance on |sigma_i - sigma_{i-1}|. When unset,
  /// relative_sigma_tol * sigma_1 is used.
  std::optional<double> sigma_tol;
  double relative_sigma_tol = 0.05;
  /// Starting point of the first round's hyperparameter search; derived from
  /// the first round's charts when unset.
  std::optional<GpHyperParams> hyper_init;
  FitOptions fit;

  void validate() const;
};

struct DenoiseRound {
  PointCloud cloud;
  GpHyperParams hyper;
  double objective = 0.0;
  /// Posterior variance of each point's normal offset (shared across outputs).
  std::vector<double> variance;
};

/// clouds[0] is the input and clouds.back() the denoised output; hypers[i] and
/// sigma_history[i] were fitted on clouds[i].
struct DenoiseTrace {
  std::vector<PointCloud> clouds;
  std::vector<GpHyperParams> hypers;
  std::vector<double> sigma_history;
  std::vector<double> objectives;
  std::vector<std::vector<double>> variances;

  std::size_t rounds() const noexcept { return hypers.size(); }
  const PointCloud& denoised() const { return clouds.back(); }
};

/// Starting hyperparameters from chart statistics: A = mean response variance,
/// rho = median squared predictor distance, sigma = 0.1 sqrt(A).
GpHyperParams default_hyper_init(std::span<const ChartRegression> charts);

/// All n charts of a cloud. Throws InsufficientNeighborsError listing every
/// point whose epsilon-ball holds <= d points.
std::vector<ChartRegression> build_all_charts(const PointCloud& cloud, double epsilon, double delta,
                                              std::size_t intrinsic_dim);

/// One pass: charts, shared hyperparameter fit warm-started at hyper_warm, then
/// each point moved along its normal space to the posterior mean at tangent
/// coordinate 0.
DenoiseRound denoise_round(const PointCloud& cloud, const DenoiseConfig& config, const GpHyperParams& hyper_warm);

/// Repeats denoise_round until sigma settles or max_iter rounds ran.
DenoiseTrace denoise(const PointCloud& cloud, const DenoiseConfig& config);

}  // namespace mrgap
