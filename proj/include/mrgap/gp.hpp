#pragma once

#include "mrgap/local_geometry.hpp"
#include "mrgap/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace mrgap {

/// Squared-exponential covariance A exp(-|u - u'|^2 / rho) plus observation
/// noise of standard deviation sigma.
struct GpHyperParams {
  double A = 1.0;
  double rho = 1.0;
  double sigma = 0.1;

  void validate() const;
  bool operator==(const GpHyperParams&) const = default;
};

/// Multi-output Gaussian posterior: one m x q mean, one m x m covariance shared
/// by every output.
struct PredictiveGaussian {
  Matrix mean;
  Matrix covariance;
};

double kernel(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, const GpHyperParams& hyper);

/// Rows of `points` are inputs; entry (i, j) = kernel(p_i, p_j).
Matrix gram(const Eigen::Ref<const Matrix>& points, const GpHyperParams& hyper);
Matrix cross_gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b, const GpHyperParams& hyper);

/// Cholesky factor of gram + sigma^2 I. On failure the diagonal receives
/// jitter 1e-12 A, escalated x10 up to 1e-6 A; NumericalError past that.
class NoisyGramFactor {
 public:
  NoisyGramFactor(const Eigen::Ref<const Matrix>& predictors, const GpHyperParams& hyper);

  const Eigen::LLT<Matrix>& llt() const noexcept { return llt_; }
  double jitter() const noexcept { return jitter_; }
  double log_det() const;
  Matrix solve(const Eigen::Ref<const Matrix>& rhs) const { return llt_.solve(rhs); }

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Posterior mean Sigma3 (Sigma1 + sigma^2 I)^-1 Z and covariance
/// Sigma4 - Sigma3 (Sigma1 + sigma^2 I)^-1 Sigma2 at the rows of test_u.
PredictiveGaussian predictive(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                              const Eigen::Ref<const Matrix>& test_u, const GpHyperParams& hyper);

/// Mean only; skips the m x m covariance.
Matrix predictive_mean(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                       const Eigen::Ref<const Matrix>& test_u, const GpHyperParams& hyper);

/// -tr(Z^T K^-1 Z) - q log det K - (qN/2) log 2pi with K = Sigma1 + sigma^2 I.
/// The first two terms carry twice the textbook weight; the maximizer is the
/// same.
double log_marginal(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                    const GpHyperParams& hyper);

/// d log_marginal / d(log A, log rho, log sigma).
using LogGradient = std::array<double, 3>;
LogGradient log_marginal_gradient(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                                  const GpHyperParams& hyper);

/// Value and log-space gradient in one factorization.
struct MarginalEvaluation {
  double value = 0.0;
  LogGradient gradient{};
};
MarginalEvaluation log_marginal_with_gradient(const Eigen::Ref<const Matrix>& train_w,
                                              const Eigen::Ref<const Matrix>& train_z, const GpHyperParams& hyper,
                                              bool want_gradient = true);

/// Sum of per-chart log marginals; charts with no members contribute 0.
/// Per-chart terms may run in parallel and are summed in chart order.
double joint_log_marginal(std::span<const ChartRegression> charts, const GpHyperParams& hyper);
MarginalEvaluation joint_log_marginal_with_gradient(std::span<const ChartRegression> charts,
                                                    const GpHyperParams& hyper);

struct FitOptions {
  double sigma_floor = 1e-9;
  bool multi_start = true;
  std::size_t max_iterations = 400;
  double gradient_tol = 1e-8;  ///< relative to max(1, |objective|)
  /// Each internal coordinate stays within a factor search_span of init.
  double search_span = 1e4;
};

struct FitReport {
  GpHyperParams hyper;
  double objective = 0.0;
  double initial_objective = 0.0;
  std::size_t evaluations = 0;
  std::size_t starts = 0;
  bool used_simplex = false;
  bool flat_responses = false;  ///< every response vanished; init returned unchanged
};

/// Maximizes joint_log_marginal over (log A, log rho, log sigma), confined to
/// a box of +-log(search_span) around init, by BFGS from
/// init and, with multi_start, from init with each parameter scaled by 0.1
/// and 10 in turn. Falls back to Nelder-Mead where gradient steps break down.
/// Never returns a point worse than init. When every response is below 1e-12
/// of the predictor scale the likelihood has no maximizer (it grows without
/// bound as A and sigma shrink) and init is returned.
FitReport fit_hyperparams_report(std::span<const ChartRegression> charts, const GpHyperParams& init,
                                 const FitOptions& options = {});
GpHyperParams fit_hyperparams(std::span<const ChartRegression> charts, const GpHyperParams& init,
                              const FitOptions& options = {});

}  // namespace mrgap
