#include "mrgap/evaluation.hpp"

#include "mrgap/neighborhood.hpp"
#include "mrgap/parallel.hpp"

#include <cmath>

namespace mrgap {

namespace {

constexpr std::size_t kTreeThreshold = 2048;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

GrmseReport summarize(std::vector<double> dist, std::size_t m, bool keep) {
  GrmseReport r;
  r.n = dist.size();
  r.m = m;
  double sum = 0.0;
  for (double d : dist) sum += d * d;
  r.value = std::sqrt(sum / static_cast<double>(dist.size()));
  if (keep) r.per_point_distances = std::move(dist);
  return r;
}

}  // namespace

GrmseReport grmse(const PointCloud& eval_set, const PointCloud& reference, bool keep_distances) {
  if (eval_set.empty() || reference.empty()) throw InputError("GRMSE needs two nonempty point sets");
  if (eval_set.ambient_dim() != reference.ambient_dim())
    throw InputError("GRMSE: dimension mismatch (" + std::to_string(eval_set.ambient_dim()) + " vs " +
                     std::to_string(reference.ambient_dim()) + ")");
  std::vector<double> dist(eval_set.size());
  if (reference.size() >= kTreeThreshold && reference.ambient_dim() <= 16) {
    const KdTree tree(reference);
    parallel_for(eval_set.size(), [&](std::size_t i) {
      dist[i] = std::sqrt(tree.nearest(eval_set.point(i).transpose()).first);
    });
  } else {
    parallel_for(eval_set.size(), [&](std::size_t i) { dist[i] = dist_to_set(eval_set.point(i).transpose(), reference); });
  }
  return summarize(std::move(dist), reference.size(), keep_distances);
}

double distance_to_manifold(const Eigen::Ref<const Vector>& p, const AnalyticManifold& manifold) {
  return std::visit(
      Overloaded{
          [&](const Circle& c) {
            if (!(c.radius > 0.0)) throw InputError("circle radius must be positive");
            if (p.size() < 2) throw InputError("circle needs ambient dimension >= 2");
            const double planar = p.head(2).norm();
            const double rest = p.size() > 2 ? p.tail(p.size() - 2).squaredNorm() : 0.0;
            return std::sqrt((planar - c.radius) * (planar - c.radius) + rest);
          },
          [&](const Sphere& s) {
            if (!(s.radius > 0.0)) throw InputError("sphere radius must be positive");
            return std::abs(p.norm() - s.radius);
          },
          [&](const Torus& t) {
            if (!(t.major > 0.0) || !(t.minor > 0.0)) throw InputError("torus radii must be positive");
            if (p.size() != 3) throw InputError("torus distance is defined in R^3");
            const double ring = std::hypot(p(0), p(1)) - t.major;
            return std::abs(std::hypot(ring, p(2)) - t.minor);
          },
          [&](const Plane& pl) {
            if (pl.dim < 1 || pl.dim > static_cast<std::size_t>(p.size()))
              throw InputError("plane dimension out of range");
            const auto rest = p.size() - static_cast<Eigen::Index>(pl.dim);
            return rest > 0 ? p.tail(rest).norm() : 0.0;
          },
      },
      manifold);
}

GrmseReport grmse_analytic(const PointCloud& eval_set, const AnalyticManifold& manifold, bool keep_distances) {
  if (eval_set.empty()) throw InputError("GRMSE needs a nonempty point set");
  std::vector<double> dist(eval_set.size());
  for (std::size_t i = 0; i < eval_set.size(); ++i) dist[i] = distance_to_manifold(eval_set.point(i).transpose(), manifold);
  return summarize(std::move(dist), 0, keep_distances);
}

SandwichCheck prop6_gap_check(const PointCloud& eval_set, const PointCloud& reference_on_manifold,
                              const AnalyticManifold& manifold, double covering_radius) {
  if (!(covering_radius >= 0.0)) throw InputError("covering radius must be nonnegative");
  for (std::size_t i = 0; i < reference_on_manifold.size(); ++i)
    if (distance_to_manifold(reference_on_manifold.point(i).transpose(), manifold) > 1e-8)
      throw InputError("reference point " + std::to_string(i) + " is not on the manifold");
  SandwichCheck out;
  out.grmse_reference = grmse(eval_set, reference_on_manifold).value;
  out.grmse_manifold = grmse_analytic(eval_set, manifold).value;
  out.covering_radius = covering_radius;
  const double g = out.grmse_manifold, gr = out.grmse_reference, r = covering_radius;
  // Round-off allowance on the comparisons only.
  const double slack = 1e-12 * std::max(1.0, gr * gr);
  out.upper_holds = g * g <= gr * gr + slack;
  out.lower_holds = gr * gr - 2.0 * r * g - r * r <= g * g + slack;
  return out;
}

}  // namespace mrgap
