#include "mrgap/point_cloud.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace mrgap {

namespace {

void check_finite(const RowMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw InputError("non-finite coordinate at point " + std::to_string(i) + ", coordinate " +
                         std::to_string(j));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

PointCloud::PointCloud(std::size_t ambient_dim)
    : points_(0, static_cast<Eigen::Index>(ambient_dim)), ambient_dim_(ambient_dim) {}

PointCloud::PointCloud(RowMatrix points)
    : points_(std::move(points)), ambient_dim_(static_cast<std::size_t>(points_.cols())) {
  if (ambient_dim_ == 0) throw InputError("point cloud needs ambient dimension >= 1");
  check_finite(points_);
}

PointCloud::PointCloud(std::size_t ambient_dim, const std::vector<std::vector<double>>& rows)
    : points_(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ambient_dim)),
      ambient_dim_(ambient_dim) {
  if (ambient_dim_ == 0) throw InputError("point cloud needs ambient dimension >= 1");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ambient_dim)
      throw InputError("point " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                       " coordinates, expected " + std::to_string(ambient_dim));
    for (std::size_t j = 0; j < ambient_dim; ++j)
      points_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  check_finite(points_);
}

PointCloud PointCloud::concat(const PointCloud& other) const {
  if (other.ambient_dim() != ambient_dim_)
    throw InputError("cannot concatenate clouds of dimension " + std::to_string(ambient_dim_) +
                     " and " + std::to_string(other.ambient_dim()));
  RowMatrix joined(points_.rows() + other.points_.rows(), points_.cols());
  joined << points_, other.points_;
  PointCloud out(ambient_dim_);
  out.points_ = std::move(joined);
  return out;
}

PointCloud load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());

  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> parsed(fields.size());
    std::size_t bad_col = fields.size();
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], parsed[c])) {
        bad_col = c;
        break;
      }
    }
    if (bad_col != fields.size()) {
      if (first_content_line) {  // header row
        first_content_line = false;
        width = fields.size();
        continue;
      }
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + ", column " +
                       std::to_string(bad_col + 1) + ": non-numeric field '" +
                       std::string(fields[bad_col]) + "'");
    }
    first_content_line = false;
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    for (double v : parsed) {
      if (!std::isfinite(v))
        throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no data rows");

  RowMatrix m = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(width));
  return PointCloud(std::move(m));
}

void save_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  char buf[32];
  const auto& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out.put(',');
      const int len = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out.write(buf, len);
    }
    out.put('\n');
  }
  if (!out) throw InputError("write failed for " + path.string());
}

Eigen::Vector3d cassini_point(double theta) {
  const double c2 = std::cos(2.0 * theta);
  const double radius = std::sqrt(c2 + std::sqrt(c2 * c2 + 0.2));
  return {radius * std::cos(theta), radius * std::sin(theta),
          0.3 * std::sin(theta + std::numbers::pi)};
}

PointCloud gen_cassini(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_cassini: n must be >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  RowMatrix m(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = cassini_point(angle(rng)).transpose();
  return PointCloud(std::move(m));
}

Eigen::Vector3d torus_point(double u, double v) {
  const double ring = kTorusMajor + kTorusMinor * std::cos(u);
  return {ring * std::cos(v), ring * std::sin(v), kTorusMinor * std::sin(u)};
}

PointCloud gen_torus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_torus: n must be >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RowMatrix m(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double u = 0.0;
    do {
      u = angle(rng);
    } while (unit(rng) * (kTorusMajor + kTorusMinor) > kTorusMajor + kTorusMinor * std::cos(u));
    m.row(i) = torus_point(u, angle(rng)).transpose();
  }
  return PointCloud(std::move(m));
}

PointCloud gen_circle(std::size_t n, std::size_t ambient_dim, double radius, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_circle: n must be >= 1");
  if (ambient_dim < 2) throw InputError("gen_circle: ambient dimension must be >= 2");
  if (!(radius > 0.0)) throw InputError("gen_circle: radius must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ambient_dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double t = angle(rng);
    m(i, 0) = radius * std::cos(t);
    m(i, 1) = radius * std::sin(t);
  }
  return PointCloud(std::move(m));
}

PointCloud gen_plane(std::size_t n, std::size_t ambient_dim, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_plane: n must be >= 1");
  if (ambient_dim < 2) throw InputError("gen_plane: ambient dimension must be >= 2");
  Rng rng(seed);
  std::uniform_real_distribution<double> side(-1.0, 1.0);
  RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ambient_dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, 0) = side(rng);
    m(i, 1) = side(rng);
  }
  return PointCloud(std::move(m));
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 3; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

EllipsoidSample gen_ellipsoid_embedded(std::size_t n, std::size_t ambient_dim, std::uint64_t seed,
                                       std::optional<std::size_t> first_slot) {
  if (n == 0) throw InputError("gen_ellipsoid_embedded: n must be >= 1");
  if (ambient_dim < 3) throw InputError("gen_ellipsoid_embedded: ambient dimension must be >= 3");
  const std::size_t slot = first_slot.value_or(std::min<std::size_t>(13, ambient_dim - 3));
  if (slot + 3 > ambient_dim) throw InputError("gen_ellipsoid_embedded: coordinate block out of range");

  const Eigen::Vector3d axes(2.0, 1.5, 1.0);
  Rng rng(seed);
  const Eigen::Matrix3d rotation = random_rotation(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double max_density = 1.0 / axes.minCoeff();

  RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ambient_dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Vector3d s;
    while (true) {
      s = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      const double len = s.norm();
      if (len == 0.0) continue;
      s /= len;
      // Area element of the map s -> diag(axes) s, up to the constant abc.
      const double density = s.cwiseQuotient(axes).norm();
      if (unit(rng) * max_density <= density) break;
    }
    const Eigen::Vector3d p = rotation * axes.cwiseProduct(s);
    m.block(i, static_cast<Eigen::Index>(slot), 1, 3) = p.transpose();
  }
  return {PointCloud(std::move(m)), rotation, axes, slot};
}

PointCloud add_gaussian_noise(const PointCloud& cloud, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw InputError("noise sigma must be >= 0");
  if (spec.sigma == 0.0 || cloud.empty()) return cloud;
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, spec.sigma);
  RowMatrix m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) += gauss(rng);
  return PointCloud(std::move(m));
}

}  // namespace mrgap
