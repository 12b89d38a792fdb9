#include "mrgap/neighborhood.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mrgap {

namespace {

void check_dim(const PointCloud& cloud, Eigen::Index dim) {
  if (static_cast<std::size_t>(dim) != cloud.ambient_dim())
    throw InputError("query has dimension " + std::to_string(dim) + ", cloud has dimension " +
                     std::to_string(cloud.ambient_dim()));
}

}  // namespace

NeighborList radius_neighbors(const PointCloud& cloud, const Eigen::Ref<const Vector>& center, double r,
                              bool include_self) {
  check_dim(cloud, center.size());
  if (!(r > 0.0)) throw InputError("radius must be positive");
  NeighborList out{std::nullopt, center, r, {}};
  const double r2 = r * r;
  const auto& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d2 = (m.row(i).transpose() - center).squaredNorm();
    if (d2 > r2) continue;
    if (!include_self && d2 == 0.0) continue;
    out.indices.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

NeighborList radius_neighbors(const PointCloud& cloud, std::size_t k, double r, bool include_self) {
  if (k >= cloud.size()) throw InputError("center index " + std::to_string(k) + " out of range");
  if (!(r > 0.0)) throw InputError("radius must be positive");
  const Vector center = cloud.point(k).transpose();
  NeighborList out{k, center, r, {}};
  const double r2 = r * r;
  const auto& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!include_self && static_cast<std::size_t>(i) == k) continue;
    if ((m.row(i).transpose() - center).squaredNorm() <= r2) out.indices.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

double dist_to_set(const Eigen::Ref<const Vector>& point, const PointCloud& reference) {
  if (reference.empty()) throw InputError("distance to an empty set is undefined");
  check_dim(reference, point.size());
  const auto& m = reference.matrix();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::min(best, (m.row(i).transpose() - point).squaredNorm());
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------

struct KdTree::Impl {
  struct Node {
    Eigen::Index split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::size_t begin = 0, end = 0;  // leaf range into order
    std::size_t left = 0, right = 0;
  };

  RowMatrix points;
  std::vector<std::size_t> order;
  std::vector<Node> nodes;
  std::size_t leaf_size;

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes.size();
    nodes.push_back({});
    if (end - begin <= leaf_size) {
      nodes[id].begin = begin;
      nodes[id].end = end;
      return id;
    }
    Eigen::Index dim = 0;
    double widest = -1.0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = points(static_cast<Eigen::Index>(order[i]), j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        dim = j;
      }
    }
    if (widest <= 0.0) {  // all coincident
      nodes[id].begin = begin;
      nodes[id].end = end;
      return id;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                     order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                       return points(static_cast<Eigen::Index>(a), dim) < points(static_cast<Eigen::Index>(b), dim);
                     });
    const double split = points(static_cast<Eigen::Index>(order[mid]), dim);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes[id].split_dim = dim;
    nodes[id].split_value = split;
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }

  void nearest(std::size_t id, const Vector& q, double& best, std::size_t& best_index) const {
    const Node& node = nodes[id];
    if (node.split_dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order[i];
        const double d2 = (points.row(static_cast<Eigen::Index>(idx)).transpose() - q).squaredNorm();
        if (d2 < best || (d2 == best && idx < best_index)) {
          best = d2;
          best_index = idx;
        }
      }
      return;
    }
    const double diff = q(node.split_dim) - node.split_value;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    nearest(near, q, best, best_index);
    if (diff * diff <= best) nearest(far, q, best, best_index);
  }

  void within(std::size_t id, const Vector& q, double r2, std::vector<std::size_t>& out) const {
    const Node& node = nodes[id];
    if (node.split_dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i)
        if ((points.row(static_cast<Eigen::Index>(order[i])).transpose() - q).squaredNorm() <= r2)
          out.push_back(order[i]);
      return;
    }
    const double diff = q(node.split_dim) - node.split_value;
    if (diff <= 0.0 || diff * diff <= r2) within(node.left, q, r2, out);
    if (diff >= 0.0 || diff * diff <= r2) within(node.right, q, r2, out);
  }
};

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size) : impl_(std::make_unique<Impl>()) {
  impl_->points = cloud.matrix();
  impl_->leaf_size = std::max<std::size_t>(1, leaf_size);
  impl_->order.resize(cloud.size());
  std::iota(impl_->order.begin(), impl_->order.end(), std::size_t{0});
  if (!cloud.empty()) impl_->build(0, cloud.size());
}

KdTree::~KdTree() = default;
KdTree::KdTree(KdTree&&) noexcept = default;
KdTree& KdTree::operator=(KdTree&&) noexcept = default;

std::size_t KdTree::size() const noexcept { return impl_->order.size(); }

std::pair<double, std::size_t> KdTree::nearest(const Eigen::Ref<const Vector>& query) const {
  if (impl_->order.empty()) throw InputError("nearest-neighbor query on an empty set");
  if (query.size() != impl_->points.cols()) throw InputError("query dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = impl_->order.size();
  impl_->nearest(0, query, best, best_index);
  return {best, best_index};
}

std::vector<std::size_t> KdTree::within(const Eigen::Ref<const Vector>& query, double r) const {
  if (query.size() != impl_->points.cols()) throw InputError("query dimension mismatch");
  std::vector<std::size_t> out;
  if (!impl_->order.empty()) impl_->within(0, query, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mrgap
