#include "mrgap/interpolator.hpp"

#include <cmath>

namespace mrgap {

double DomainBall::sampling_radius() const noexcept {
  if (radius > 0.0) return radius;
  if (mean_distance > 0.0) return 0.5 * mean_distance;
  return 0.0;
}

DomainBall estimate_domain_ball(const Eigen::Ref<const Matrix>& predictors) {
  if (predictors.rows() < 2) throw InputError("domain ball needs at least two predictors");
  DomainBall ball;
  ball.center = predictors.colwise().mean().transpose();
  const Vector dist = (predictors.rowwise() - ball.center.transpose()).rowwise().norm();
  ball.mean_distance = dist.mean();
  ball.stddev_distance = std::sqrt((dist.array() - ball.mean_distance).square().mean());
  ball.radius = ball.mean_distance - ball.stddev_distance;
  return ball;
}

Matrix sample_ball_uniform(const DomainBall& ball, std::size_t count, std::size_t dim, Rng& rng) {
  if (count == 0) throw InputError("sample count must be >= 1");
  if (static_cast<std::size_t>(ball.center.size()) != dim) throw InputError("ball center dimension mismatch");
  const double r = ball.sampling_radius();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Vector dir(static_cast<Eigen::Index>(dim));
    double len = 0.0;
    do {
      for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = gauss(rng);
      len = dir.norm();
    } while (len == 0.0);
    const double scale = r * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
    out.row(i) = (ball.center + dir * (scale / len)).transpose();
  }
  return out;
}

Matrix sample_ball_uniform(const DomainBall& ball, std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ball_uniform(ball, count, dim, rng);
}

InterpolationResult interpolate(const DenoiseTrace& trace, const DenoiseConfig& config, std::size_t per_chart,
                                std::uint64_t seed) {
  config.validate();
  if (trace.clouds.size() < 2 || trace.hypers.empty())
    throw InputError("interpolation needs a trace with at least one denoising round");
  if (per_chart == 0) throw InputError("points per chart must be >= 1");

  const PointCloud& cloud = trace.clouds[trace.clouds.size() - 2];
  const GpHyperParams& hyper = trace.hypers.back();
  const std::size_t n = cloud.size();
  const std::size_t dim = cloud.ambient_dim();
  const std::size_t d = config.intrinsic_dim;
  const auto charts = build_all_charts(cloud, config.epsilon, config.delta, d);

  Rng rng(seed);
  RowMatrix accumulated(static_cast<Eigen::Index>(n * per_chart), static_cast<Eigen::Index>(dim));
  Eigen::Index filled = 0;
  InterpolationResult result;
  result.source_chart.reserve(n * per_chart);
  const double delta2 = config.delta * config.delta;

  for (std::size_t k = 0; k < n; ++k) {
    const ChartRegression& chart = charts[k];
    const DomainBall ball = estimate_domain_ball(chart.predictors);
    if (ball.sampling_radius() <= 0.0) {
      warn("chart " + std::to_string(k) + ": degenerate domain ball, no points interpolated");
      result.skipped_charts.push_back(k);
      continue;
    }
    const Matrix samples = sample_ball_uniform(ball, per_chart, d, rng);

    // Previously interpolated points inside the delta-ball glue this chart to earlier ones.
    std::vector<Eigen::Index> glue;
    const auto base = chart.frame.base.transpose();
    for (Eigen::Index i = 0; i < filled; ++i)
      if ((accumulated.row(i) - base).squaredNorm() <= delta2) glue.push_back(i);

    const auto members = chart.predictors.rows();
    const auto total = members + static_cast<Eigen::Index>(glue.size());
    Matrix train_w(total, static_cast<Eigen::Index>(d));
    Matrix train_z(total, static_cast<Eigen::Index>(dim - d));
    train_w.topRows(members) = chart.predictors;
    train_z.topRows(members) = chart.responses;
    if (!glue.empty()) {
      Matrix disp(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(glue.size()));
      for (std::size_t j = 0; j < glue.size(); ++j)
        disp.col(static_cast<Eigen::Index>(j)) = (accumulated.row(glue[j]) - base).transpose();
      train_w.bottomRows(static_cast<Eigen::Index>(glue.size())) = (chart.frame.tangent().transpose() * disp).transpose();
      train_z.bottomRows(static_cast<Eigen::Index>(glue.size())) = (chart.frame.normal().transpose() * disp).transpose();
    }

    Matrix normal_coords;
    try {
      normal_coords = predictive_mean(train_w, train_z, samples, hyper);
    } catch (const NumericalError& e) {
      throw NumericalError("chart " + std::to_string(k) + ": " + e.what());
    }
    const Matrix lifted = (chart.frame.tangent() * samples.transpose() + chart.frame.normal() * normal_coords.transpose())
                              .colwise() +
                          chart.frame.base;
    accumulated.middleRows(filled, static_cast<Eigen::Index>(per_chart)) = lifted.transpose();
    filled += static_cast<Eigen::Index>(per_chart);
    result.source_chart.insert(result.source_chart.end(), per_chart, k);
  }

  result.points = PointCloud(RowMatrix(accumulated.topRows(filled)));
  return result;
}

}  // namespace mrgap
