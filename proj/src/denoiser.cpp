#include "mrgap/denoiser.hpp"

#include "mrgap/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace mrgap {

void DenoiseConfig::validate() const {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (intrinsic_dim < 1) throw InputError("intrinsic dimension must be >= 1");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
  if (sigma_tol && !(*sigma_tol > 0.0)) throw InputError("sigma tolerance must be positive");
  if (!(relative_sigma_tol > 0.0)) throw InputError("relative sigma tolerance must be positive");
  if (hyper_init) hyper_init->validate();
}

GpHyperParams default_hyper_init(std::span<const ChartRegression> charts) {
  double variance_sum = 0.0;
  std::size_t variance_count = 0;
  std::vector<double> sq_dists;
  for (const auto& c : charts) {
    if (c.size() == 0) continue;
    const double mean = c.responses.mean();
    variance_sum += (c.responses.array() - mean).square().mean();
    ++variance_count;
    for (Eigen::Index i = 0; i < c.predictors.rows(); ++i)
      for (Eigen::Index j = i + 1; j < c.predictors.rows(); ++j)
        sq_dists.push_back((c.predictors.row(i) - c.predictors.row(j)).squaredNorm());
  }
  GpHyperParams h;
  h.A = variance_count ? variance_sum / static_cast<double>(variance_count) : 0.0;
  if (!(h.A > 1e-12)) h.A = 1e-12;
  if (!sq_dists.empty()) {
    auto mid = sq_dists.begin() + static_cast<std::ptrdiff_t>(sq_dists.size() / 2);
    std::nth_element(sq_dists.begin(), mid, sq_dists.end());
    h.rho = *mid;
  }
  if (!(h.rho > 0.0)) h.rho = 1.0;
  h.sigma = 0.1 * std::sqrt(h.A);
  return h;
}

std::vector<ChartRegression> build_all_charts(const PointCloud& cloud, double epsilon, double delta,
                                              std::size_t intrinsic_dim) {
  const std::size_t n = cloud.size();
  if (n == 0) throw InputError("cannot build charts on an empty cloud");
  if (!(delta > epsilon))
    warn("delta (" + std::to_string(delta) + ") should exceed epsilon (" + std::to_string(epsilon) + ")");

  std::vector<std::size_t> counts(n);
  parallel_for(n, [&](std::size_t k) { counts[k] = covariance_ball_count(cloud, k, epsilon); });
  std::vector<std::size_t> offenders;
  for (std::size_t k = 0; k < n; ++k)
    if (counts[k] <= intrinsic_dim) offenders.push_back(k);
  if (!offenders.empty()) {
    std::string msg = std::to_string(offenders.size()) + " point(s) have <= " + std::to_string(intrinsic_dim) +
                      " points within epsilon=" + std::to_string(epsilon) + ":";
    for (std::size_t i = 0; i < std::min<std::size_t>(offenders.size(), 10); ++i)
      msg += " " + std::to_string(offenders[i]) + " (" + std::to_string(counts[offenders[i]]) + ")";
    if (offenders.size() > 10) msg += " ...";
    throw InsufficientNeighborsError(offenders.front(), counts[offenders.front()], msg);
  }

  std::vector<ChartRegression> charts(n);
  parallel_for(n, [&](std::size_t k) {
    charts[k] = assemble_chart(cloud, k, local_frame(cloud, k, epsilon, intrinsic_dim), delta);
  });
  return charts;
}

DenoiseRound denoise_round(const PointCloud& cloud, const DenoiseConfig& config, const GpHyperParams& hyper_warm) {
  config.validate();
  const auto charts = build_all_charts(cloud, config.epsilon, config.delta, config.intrinsic_dim);
  const FitReport fit = fit_hyperparams_report(charts, hyper_warm, config.fit);

  const std::size_t n = cloud.size();
  RowMatrix moved = cloud.matrix();
  std::vector<double> variance(n);
  const Matrix origin = Matrix::Zero(1, static_cast<Eigen::Index>(config.intrinsic_dim));
  parallel_for(n, [&](std::size_t k) {
    const ChartRegression& c = charts[k];
    PredictiveGaussian post;
    try {
      post = predictive(c.predictors, c.responses, origin, fit.hyper);
    } catch (const NumericalError& e) {
      throw NumericalError("chart " + std::to_string(k) + ": " + e.what());
    }
    const Vector offset = c.frame.normal() * post.mean.row(0).transpose();
    moved.row(static_cast<Eigen::Index>(k)) += offset.transpose();
    variance[k] = post.covariance(0, 0);
  });
  return {PointCloud(std::move(moved)), fit.hyper, fit.objective, std::move(variance)};
}

DenoiseTrace denoise(const PointCloud& cloud, const DenoiseConfig& config) {
  config.validate();
  DenoiseTrace trace;
  trace.clouds.push_back(cloud);

  GpHyperParams warm;
  if (config.hyper_init) {
    warm = *config.hyper_init;
  } else {
    const auto charts = build_all_charts(cloud, config.epsilon, config.delta, config.intrinsic_dim);
    warm = default_hyper_init(charts);
  }

  std::optional<double> tol = config.sigma_tol;
  for (std::size_t round = 0; round < config.max_iter; ++round) {
    DenoiseRound r = denoise_round(trace.clouds.back(), config, warm);
    trace.clouds.push_back(std::move(r.cloud));
    trace.hypers.push_back(r.hyper);
    trace.sigma_history.push_back(r.hyper.sigma);
    trace.objectives.push_back(r.objective);
    trace.variances.push_back(std::move(r.variance));
    warm = r.hyper;
    if (!tol) tol = config.relative_sigma_tol * r.hyper.sigma;
    const std::size_t k = trace.sigma_history.size();
    if (k >= 2 && std::abs(trace.sigma_history[k - 1] - trace.sigma_history[k - 2]) <= *tol) break;
  }
  return trace;
}

}  // namespace mrgap
