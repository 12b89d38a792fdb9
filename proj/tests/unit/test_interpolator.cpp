#include "helpers.hpp"
#include "mrgap/evaluation.hpp"
#include "mrgap/interpolator.hpp"

#include <doctest.h>

#include <cmath>

using namespace mrgap;

namespace {

DenoiseConfig cassini_config() {
  DenoiseConfig c;
  c.epsilon = 0.3;
  c.delta = 0.6;
  c.intrinsic_dim = 1;
  return c;
}

const DenoiseTrace& cassini_trace() {
  static const DenoiseTrace t = denoise(add_gaussian_noise(gen_cassini(102, 7), {0.04, 8}), cassini_config());
  return t;
}

}  // namespace

TEST_CASE("domain ball examples") {
  const DomainBall pair = estimate_domain_ball((Matrix(2, 1) << -1.0, 1.0).finished());
  CHECK(pair.center(0) == 0.0);
  CHECK(pair.mean_distance == 1.0);
  CHECK(pair.stddev_distance == 0.0);
  CHECK(pair.radius == 1.0);

  const DomainBall same = estimate_domain_ball(Matrix::Constant(4, 2, 0.5));
  CHECK(same.radius == 0.0);
  CHECK(same.sampling_radius() == 0.0);

  DomainBall fallback;
  fallback.radius = -0.2;
  fallback.mean_distance = 0.6;
  CHECK(fallback.sampling_radius() == doctest::Approx(0.3));
  CHECK_THROWS_AS(estimate_domain_ball(Matrix::Zero(1, 2)), InputError);
}

TEST_CASE("domain ball matches a direct formula") {
  Rng rng(1);
  const Matrix p = testing::gaussian_matrix(rng, 25, 2);
  double cx = 0.0, cy = 0.0;
  for (Eigen::Index i = 0; i < 25; ++i) {
    cx += p(i, 0) / 25.0;
    cy += p(i, 1) / 25.0;
  }
  std::vector<double> d;
  for (Eigen::Index i = 0; i < 25; ++i) d.push_back(std::hypot(p(i, 0) - cx, p(i, 1) - cy));
  double m = 0.0;
  for (double x : d) m += x / 25.0;
  double v = 0.0;
  for (double x : d) v += (x - m) * (x - m) / 25.0;
  const DomainBall b = estimate_domain_ball(p);
  CHECK(std::abs(b.center(0) - cx) <= 1e-12);
  CHECK(std::abs(b.center(1) - cy) <= 1e-12);
  CHECK(std::abs(b.radius - (m - std::sqrt(v))) <= 1e-12);
}

TEST_CASE("uniform ball sampling") {
  DomainBall b;
  b.center = Vector::Constant(2, 1.0);
  b.radius = 0.7;
  const Matrix s = sample_ball_uniform(b, 1000, 2, std::uint64_t{3});
  CHECK(s.rows() == 1000);
  CHECK(((s.rowwise() - b.center.transpose()).rowwise().norm().array() <= 0.7).all());
  CHECK((sample_ball_uniform(b, 1000, 2, std::uint64_t{3}) - s).norm() == 0.0);
  CHECK((sample_ball_uniform(b, 1000, 2, std::uint64_t{4}) - s).norm() > 0.0);
  CHECK_THROWS_AS(sample_ball_uniform(b, 0, 2, std::uint64_t{1}), InputError);
  CHECK_THROWS_AS(sample_ball_uniform(b, 5, 3, std::uint64_t{1}), InputError);

  DomainBall line;
  line.center = Vector::Constant(1, -2.0);
  line.radius = 0.8;
  const Matrix x = sample_ball_uniform(line, 100000, 1, std::uint64_t{5});
  CHECK((x.array() + 2.0).abs().mean() == doctest::Approx(0.4).epsilon(0.02));

  // In d = 3 the radial CDF is (r/R)^3, so half the mass lies within R 0.5^(1/3).
  DomainBall ball3;
  ball3.center = Vector::Zero(3);
  ball3.radius = 1.0;
  const Matrix y = sample_ball_uniform(ball3, 40000, 3, std::uint64_t{6});
  const double inner = (y.rowwise().norm().array() <= std::cbrt(0.5)).cast<double>().mean();
  CHECK(inner == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("interpolation needs a finished round") {
  DenoiseTrace empty;
  empty.clouds.push_back(gen_cassini(10, 1));
  CHECK_THROWS_AS(interpolate(empty, cassini_config(), 5, 1), InputError);
  CHECK_THROWS_AS(interpolate(cassini_trace(), cassini_config(), 0, 1), InputError);
}

TEST_CASE("cassini interpolation count and tangent pass-through") {
  const DenoiseTrace& t = cassini_trace();
  const DenoiseConfig cfg = cassini_config();
  const InterpolationResult r = interpolate(t, cfg, 20, 42);
  CHECK(r.points.size() == 2040);
  CHECK(r.skipped_charts.empty());
  CHECK(r.source_chart.size() == 2040);

  const PointCloud& source = t.clouds[t.clouds.size() - 2];
  const auto charts = build_all_charts(source, cfg.epsilon, cfg.delta, 1);
  Rng rng(42);
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const Matrix samples = sample_ball_uniform(estimate_domain_ball(charts[k].predictors), 20, 1, rng);
    for (std::size_t j = 0; j < 20; ++j) {
      const std::size_t row = 20 * k + j;
      CHECK(r.source_chart[row] == k);
      const Vector w = project_tangent(charts[k].frame, r.points.point(row).transpose());
      CHECK(std::abs(w(0) - samples(static_cast<Eigen::Index>(j), 0)) <= 1e-10);
    }
  }

  const InterpolationResult again = interpolate(t, cfg, 20, 42);
  CHECK((again.points.matrix() - r.points.matrix()).norm() == 0.0);
}

TEST_CASE("interpolated points stay near the curve") {
  const DenoiseTrace& t = cassini_trace();
  const InterpolationResult r = interpolate(t, cassini_config(), 20, 1);
  const PointCloud truth = gen_cassini(20000, 100);
  CHECK(grmse(r.points, truth).value < grmse(t.clouds.front(), truth).value);

  // Soft gluing check: later charts land near earlier interpolations.
  const double sigma = t.sigma_history.back();
  std::size_t far = 0, checked = 0;
  for (std::size_t k = 1; k < 102; ++k) {
    const PointCloud earlier(RowMatrix(r.points.matrix().topRows(static_cast<Eigen::Index>(20 * k))));
    for (std::size_t j = 0; j < 20; ++j) {
      const Vector p = r.points.point(20 * k + j).transpose();
      if (dist_to_set(p, earlier) > 0.05) continue;  // outside the overlap
      ++checked;
      if (dist_to_set(p, earlier) > 3.0 * sigma + 0.02) ++far;
    }
  }
  WARN_MESSAGE(far <= checked / 10, "gluing: ", far, " of ", checked, " overlap points are far from earlier charts");
}

TEST_CASE("flat plane interpolation stays in the plane") {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RowMatrix m = RowMatrix::Zero(150, 3);
  for (Eigen::Index i = 0; i < 150; ++i) {
    m(i, 0) = u(rng);
    m(i, 1) = u(rng);
  }
  DenoiseConfig cfg;
  cfg.epsilon = 0.5;
  cfg.delta = 0.8;
  cfg.intrinsic_dim = 2;
  cfg.max_iter = 1;
  const DenoiseTrace t = denoise(PointCloud(m), cfg);
  const InterpolationResult r = interpolate(t, cfg, 10, 2);
  CHECK(r.points.size() == 1500);
  CHECK(r.points.matrix().col(2).cwiseAbs().maxCoeff() <= 1e-6);
}
