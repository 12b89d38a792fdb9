#pragma once

#include "mrgap/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace mrgap {

/// The generator behind every stochastic operation: 64-bit Mersenne Twister
/// (std::mt19937_64), always constructed from an explicit seed.
using Rng = std::mt19937_64;

/// n points in R^D stored row-wise. Immutable after construction; every
/// coordinate is finite.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t ambient_dim);
  explicit PointCloud(RowMatrix points);
  PointCloud(std::size_t ambient_dim, const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  bool empty() const noexcept { return size() == 0; }

  auto point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }
  const RowMatrix& matrix() const noexcept { return points_; }

  /// Rows of `this` followed by rows of `other`.
  PointCloud concat(const PointCloud& other) const;

 private:
  RowMatrix points_;
  std::size_t ambient_dim_ = 0;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

PointCloud load_csv(const std::filesystem::path& path);
void save_csv(const PointCloud& cloud, const std::filesystem::path& path);

// Synthetic manifolds.

/// Cassini oval in R^3 at parameter theta.
Eigen::Vector3d cassini_point(double theta);
/// theta drawn uniformly on [0, 2pi): uniform in parameter, not in arc length.
PointCloud gen_cassini(std::size_t n, std::uint64_t seed);

inline constexpr double kTorusMajor = 2.0;
inline constexpr double kTorusMinor = 0.8;
Eigen::Vector3d torus_point(double u, double v);
/// Uniform with respect to surface area (rejection on u with acceptance
/// proportional to 2 + 0.8 cos u).
PointCloud gen_torus(std::size_t n, std::uint64_t seed);

struct EllipsoidSample {
  PointCloud cloud;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d semi_axes;
  std::size_t first_slot;  ///< zero-based coordinate of the first embedded axis
};

/// Ellipsoid x^2/4 + y^2/2.25 + z^2 = 1 sampled uniformly on its surface, rotated
/// by a seeded random orthogonal matrix and written into coordinates
/// [first_slot, first_slot + 3) of R^D (default slots 14-16 in one-based
/// numbering, clamped so the block fits).
EllipsoidSample gen_ellipsoid_embedded(std::size_t n, std::size_t ambient_dim, std::uint64_t seed,
                                       std::optional<std::size_t> first_slot = std::nullopt);

/// Circle of the given radius in the plane of the first two of D coordinates,
/// uniform in angle.
PointCloud gen_circle(std::size_t n, std::size_t ambient_dim, double radius, std::uint64_t seed);
/// Uniform on the square [-1, 1]^2 spanned by the first two of D coordinates.
PointCloud gen_plane(std::size_t n, std::size_t ambient_dim, std::uint64_t seed);

/// Haar-distributed 3x3 orthogonal matrix.
Eigen::Matrix3d random_rotation(Rng& rng);

PointCloud add_gaussian_noise(const PointCloud& cloud, const NoiseSpec& spec);

}  // namespace mrgap
