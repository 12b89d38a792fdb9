#pragma once

#include "mrgap/point_cloud.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace mrgap {

/// Members of a closed Euclidean ball, indices sorted ascending.
struct NeighborList {
  std::optional<std::size_t> center_index;
  Vector center;
  double radius = 0.0;
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Indices i with ||y_i - center|| <= r. With include_self false, points that
/// coincide exactly with the center are dropped.
NeighborList radius_neighbors(const PointCloud& cloud, const Eigen::Ref<const Vector>& center, double r,
                              bool include_self = true);

/// Same query centered on cloud point k; include_self false drops index k only.
NeighborList radius_neighbors(const PointCloud& cloud, std::size_t k, double r, bool include_self = true);

/// Exact distance from point to the nearest member of reference (brute force).
double dist_to_set(const Eigen::Ref<const Vector>& point, const PointCloud& reference);

/// Static k-d tree over a cloud for exact nearest-neighbor and radius queries.
/// Returns the same answers as the brute-force routines above.
class KdTree {
 public:
  explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 16);
  ~KdTree();
  KdTree(KdTree&&) noexcept;
  KdTree& operator=(KdTree&&) noexcept;

  /// Squared distance to, and index of, the nearest point.
  std::pair<double, std::size_t> nearest(const Eigen::Ref<const Vector>& query) const;
  std::vector<std::size_t> within(const Eigen::Ref<const Vector>& query, double r) const;

  std::size_t size() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mrgap
