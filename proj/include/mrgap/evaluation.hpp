#pragma once

#include "mrgap/point_cloud.hpp"

#include <variant>
#include <vector>

namespace mrgap {

/// Root mean square of point-to-set distances.
struct GrmseReport {
  double value = 0.0;
  std::size_t n = 0;  ///< evaluated points
  std::size_t m = 0;  ///< reference points (0 for analytic references)
  std::vector<double> per_point_distances;
};

/// Exact nearest distances from every point of eval_set to reference. Large
/// references go through a k-d tree; small ones are scanned directly.
GrmseReport grmse(const PointCloud& eval_set, const PointCloud& reference, bool keep_distances = false);

// Analytic reference manifolds, all centered at the origin.
struct Circle {
  double radius = 1.0;  ///< in the plane of the first two coordinates
};
struct Sphere {
  double radius = 1.0;  ///< in all D coordinates
};
struct Torus {
  double major = kTorusMajor;  ///< around the third axis, D = 3
  double minor = kTorusMinor;
};
struct Plane {
  std::size_t dim = 2;  ///< span of the first `dim` coordinate axes
};
using AnalyticManifold = std::variant<Circle, Sphere, Torus, Plane>;

double distance_to_manifold(const Eigen::Ref<const Vector>& point, const AnalyticManifold& manifold);
GrmseReport grmse_analytic(const PointCloud& eval_set, const AnalyticManifold& manifold, bool keep_distances = false);

struct SandwichCheck {
  double grmse_reference = 0.0;  ///< against the sampled reference
  double grmse_manifold = 0.0;   ///< against the analytic manifold
  double covering_radius = 0.0;
  bool upper_holds = false;  ///< grmse_manifold <= grmse_reference
  bool lower_holds = false;  ///< grmse_reference^2 - 2 r grmse_manifold - r^2 <= grmse_manifold^2
  bool holds() const noexcept { return upper_holds && lower_holds; }
};

/// Brackets the distance to the manifold between the sampled-reference value
/// and its covering-radius correction. Throws InputError when a reference
/// point lies farther than 1e-8 from the manifold.
SandwichCheck prop6_gap_check(const PointCloud& eval_set, const PointCloud& reference_on_manifold,
                              const AnalyticManifold& manifold, double covering_radius);

}  // namespace mrgap
