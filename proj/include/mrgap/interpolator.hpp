#pragma once

#include "mrgap/denoiser.hpp"

#include <vector>

namespace mrgap {

/// Ball in chart coordinates from which new tangent coordinates are drawn.
/// radius = mean_distance - stddev_distance of the predictors around center.
struct DomainBall {
  Vector center;
  double radius = 0.0;
  double mean_distance = 0.0;
  double stddev_distance = 0.0;

  /// radius when positive, else mean_distance / 2; 0 means "skip this chart".
  double sampling_radius() const noexcept;
};

/// Rows of predictors are the chart's tangent coordinates (at least two).
DomainBall estimate_domain_ball(const Eigen::Ref<const Matrix>& predictors);

/// K points i.i.d. uniform on the closed ball of ball.sampling_radius(): a
/// normalized Gaussian direction scaled by R u^(1/d). Returned as K x d.
Matrix sample_ball_uniform(const DomainBall& ball, std::size_t count, std::size_t dim, Rng& rng);
Matrix sample_ball_uniform(const DomainBall& ball, std::size_t count, std::size_t dim, std::uint64_t seed);

struct InterpolationResult {
  PointCloud points;
  std::vector<std::size_t> source_chart;  ///< chart index of every output row
  std::vector<std::size_t> skipped_charts;
};

/// Interpolates `per_chart` points around every chart of the second-to-last
/// cloud of the trace, in chart order, using the last round's hyperparameters.
/// Each chart's training set is augmented with the previously interpolated
/// points inside its delta-ball.
InterpolationResult interpolate(const DenoiseTrace& trace, const DenoiseConfig& config, std::size_t per_chart,
                                std::uint64_t seed);

}  // namespace mrgap
