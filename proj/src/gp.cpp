#include "mrgap/gp.hpp"

#include "mrgap/parallel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mrgap {

namespace {

Matrix squared_distances(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  Matrix d2(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) d2(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d2;
}

// exp(-r) for r >= 0, exactly 0 past r = 200 so the factorizations never see
// subnormal entries.
constexpr double kDecayCutoff = 200.0;

Matrix decay(const Matrix& d2, double rho) {
  return (d2.array() / rho).unaryExpr([](double r) { return r > kDecayCutoff ? 0.0 : std::exp(-r); }).matrix();
}

void check_training(const Eigen::Ref<const Matrix>& w, const Eigen::Ref<const Matrix>& z) {
  if (w.rows() != z.rows())
    throw InputError("training predictors and responses differ in count: " + std::to_string(w.rows()) + " vs " +
                     std::to_string(z.rows()));
}

}  // namespace

void GpHyperParams::validate() const {
  if (!(A > 0.0) || !std::isfinite(A)) throw InputError("GP signal variance A must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InputError("GP length parameter rho must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("GP noise sigma must be nonnegative");
}

double kernel(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, const GpHyperParams& hyper) {
  if (u.size() != v.size()) throw InputError("kernel: dimension mismatch");
  const double r = (u - v).squaredNorm() / hyper.rho;
  return r > kDecayCutoff ? 0.0 : hyper.A * std::exp(-r);
}

Matrix cross_gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b, const GpHyperParams& hyper) {
  if (a.cols() != b.cols()) throw InputError("cross_gram: dimension mismatch");
  return hyper.A * decay(squared_distances(a, b), hyper.rho);
}

Matrix gram(const Eigen::Ref<const Matrix>& points, const GpHyperParams& hyper) {
  Matrix g = cross_gram(points, points, hyper);
  g.diagonal().setConstant(hyper.A);
  return g;
}

NoisyGramFactor::NoisyGramFactor(const Eigen::Ref<const Matrix>& predictors, const GpHyperParams& hyper) {
  Matrix k = gram(predictors, hyper);
  k.diagonal().array() += hyper.sigma * hyper.sigma;
  llt_.compute(k);
  if (llt_.info() == Eigen::Success) return;
  for (double factor = 1e-12; factor <= 1e-6 * (1.0 + 1e-9); factor *= 10.0) {
    jitter_ = factor * hyper.A;
    Matrix kj = k;
    kj.diagonal().array() += jitter_;
    llt_.compute(kj);
    if (llt_.info() == Eigen::Success) return;
  }
  throw NumericalError("Cholesky factorization of the " + std::to_string(k.rows()) + "x" +
                       std::to_string(k.rows()) + " GP covariance failed after jitter " + std::to_string(jitter_));
}

double NoisyGramFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

PredictiveGaussian predictive(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                              const Eigen::Ref<const Matrix>& test_u, const GpHyperParams& hyper) {
  check_training(train_w, train_z);
  PredictiveGaussian out;
  Matrix prior = gram(test_u, hyper);
  if (train_w.rows() == 0) {
    out.mean = Matrix::Zero(test_u.rows(), train_z.cols());
    out.covariance = std::move(prior);
    return out;
  }
  if (train_w.cols() != test_u.cols()) throw InputError("predictive: predictor dimension mismatch");
  const NoisyGramFactor factor(train_w, hyper);
  const Matrix cross = cross_gram(train_w, test_u, hyper);  // Sigma2, N x m
  out.mean = cross.transpose() * factor.solve(train_z);
  const Matrix v = factor.llt().matrixL().solve(cross);
  out.covariance = prior - v.transpose() * v;
  out.covariance = (out.covariance + out.covariance.transpose()) * 0.5;
  for (Eigen::Index i = 0; i < out.covariance.rows(); ++i)
    if (out.covariance(i, i) < 0.0) out.covariance(i, i) = 0.0;
  return out;
}

Matrix predictive_mean(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                       const Eigen::Ref<const Matrix>& test_u, const GpHyperParams& hyper) {
  check_training(train_w, train_z);
  if (train_w.rows() == 0) return Matrix::Zero(test_u.rows(), train_z.cols());
  if (train_w.cols() != test_u.cols()) throw InputError("predictive_mean: predictor dimension mismatch");
  const NoisyGramFactor factor(train_w, hyper);
  return cross_gram(test_u, train_w, hyper) * factor.solve(train_z);
}

namespace {

// Log marginal from squared predictor distances. With zz = Z Z^T (used when
// outputs outnumber training points) the data term is tr(K^-1 Z Z^T).
MarginalEvaluation evaluate_chart(const Matrix& d2, const Eigen::Ref<const Matrix>& z, const Matrix* zz,
                                  const Eigen::Ref<const Matrix>& w, const GpHyperParams& hyper, bool want_gradient) {
  MarginalEvaluation out;
  const auto n = static_cast<double>(d2.rows());
  const auto q = static_cast<double>(z.cols());
  Matrix sigma1 = hyper.A * decay(d2, hyper.rho);
  Matrix k = sigma1;
  k.diagonal().array() += hyper.sigma * hyper.sigma;

  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    const NoisyGramFactor fallback(w, hyper);  // applies the jitter ladder or throws
    llt = fallback.llt();
  }
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double constant = 0.5 * q * n * std::log(2.0 * std::numbers::pi);

  if (zz) {
    const Matrix k_inv = llt.solve(Matrix::Identity(k.rows(), k.cols()));
    out.value = -k_inv.cwiseProduct(*zz).sum() - q * log_det - constant;
    if (!want_gradient) return out;
    const Matrix w_mat = k_inv * *zz * k_inv - q * k_inv;
    const Matrix ws = w_mat.cwiseProduct(sigma1);
    out.gradient = {ws.sum(), ws.cwiseProduct(d2).sum() / hyper.rho, 2.0 * hyper.sigma * hyper.sigma * w_mat.trace()};
    return out;
  }

  const Matrix alpha = llt.solve(z);
  out.value = -(z.array() * alpha.array()).sum() - q * log_det - constant;
  if (!want_gradient) return out;

  // d value / d theta = tr((alpha alpha^T - q K^-1) dK/dtheta).
  const Matrix w_mat = alpha * alpha.transpose() - q * llt.solve(Matrix::Identity(k.rows(), k.cols()));
  const Matrix ws = w_mat.cwiseProduct(sigma1);
  out.gradient = {ws.sum(), ws.cwiseProduct(d2).sum() / hyper.rho, 2.0 * hyper.sigma * hyper.sigma * w_mat.trace()};
  return out;
}

}  // namespace

MarginalEvaluation log_marginal_with_gradient(const Eigen::Ref<const Matrix>& train_w,
                                              const Eigen::Ref<const Matrix>& train_z, const GpHyperParams& hyper,
                                              bool want_gradient) {
  check_training(train_w, train_z);
  if (train_w.rows() == 0) return {};
  return evaluate_chart(squared_distances(train_w, train_w), train_z, nullptr, train_w, hyper, want_gradient);
}

double log_marginal(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                    const GpHyperParams& hyper) {
  if (train_w.rows() == 0) throw InputError("log_marginal needs at least one training point");
  return log_marginal_with_gradient(train_w, train_z, hyper, false).value;
}

LogGradient log_marginal_gradient(const Eigen::Ref<const Matrix>& train_w, const Eigen::Ref<const Matrix>& train_z,
                                  const GpHyperParams& hyper) {
  if (train_w.rows() == 0) throw InputError("log_marginal_gradient needs at least one training point");
  return log_marginal_with_gradient(train_w, train_z, hyper, true).gradient;
}

namespace {

// Per-chart quantities that do not depend on the hyperparameters.
struct ChartCache {
  Matrix d2;
  Matrix zz;
  bool use_moments = false;
};

std::vector<ChartCache> build_cache(std::span<const ChartRegression> charts) {
  std::vector<ChartCache> cache(charts.size());
  parallel_for(charts.size(), [&](std::size_t k) {
    const ChartRegression& c = charts[k];
    cache[k].d2 = squared_distances(c.predictors, c.predictors);
    cache[k].use_moments = c.responses.cols() > c.responses.rows();
    if (cache[k].use_moments) cache[k].zz = c.responses * c.responses.transpose();
  });
  return cache;
}

MarginalEvaluation joint_evaluate(std::span<const ChartRegression> charts, const GpHyperParams& hyper,
                                  bool want_gradient, const std::vector<ChartCache>* cache = nullptr) {
  if (charts.empty()) throw InputError("joint likelihood needs at least one chart");
  const auto q = charts.front().responses.cols();
  for (const auto& c : charts) {
    if (c.size() > 0 && c.responses.cols() != q) throw InputError("charts disagree on response dimension");
    check_training(c.predictors, c.responses);
  }

  std::vector<MarginalEvaluation> terms(charts.size());
  parallel_for(charts.size(), [&](std::size_t k) {
    const ChartRegression& c = charts[k];
    if (c.predictors.rows() == 0) return;
    try {
      if (cache) {
        const ChartCache& cc = (*cache)[k];
        terms[k] = evaluate_chart(cc.d2, c.responses, cc.use_moments ? &cc.zz : nullptr, c.predictors, hyper,
                                  want_gradient);
      } else {
        terms[k] = log_marginal_with_gradient(c.predictors, c.responses, hyper, want_gradient);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("chart " + std::to_string(k) + ": " + e.what());
    }
  });
  MarginalEvaluation total;
  for (const auto& t : terms) {
    total.value += t.value;
    for (std::size_t i = 0; i < 3; ++i) total.gradient[i] += t.gradient[i];
  }
  return total;
}

}  // namespace

double joint_log_marginal(std::span<const ChartRegression> charts, const GpHyperParams& hyper) {
  return joint_evaluate(charts, hyper, false).value;
}

MarginalEvaluation joint_log_marginal_with_gradient(std::span<const ChartRegression> charts,
                                                    const GpHyperParams& hyper) {
  return joint_evaluate(charts, hyper, true);
}

// ---------------------------------------------------------------------------
// Hyperparameter search. Internal coordinates x = (log A, log rho, s) with
// sigma = floor + exp(s); GSL minimizes the negated joint likelihood.

namespace {

struct SearchContext {
  std::span<const ChartRegression> charts;
  const std::vector<ChartCache>* cache;
  double sigma_floor;
  std::array<double, 3> center;
  double half_width;
  std::size_t evaluations = 0;
};

GpHyperParams to_hyper(const gsl_vector* x, double floor) {
  return {std::exp(gsl_vector_get(x, 0)), std::exp(gsl_vector_get(x, 1)), floor + std::exp(gsl_vector_get(x, 2))};
}

// Returns +inf (and zero gradient) where the objective cannot be evaluated so
// the line search backs off.
double negated(const gsl_vector* x, SearchContext& ctx, gsl_vector* grad) {
  ++ctx.evaluations;
  for (std::size_t i = 0; i < 3; ++i)
    if (!std::isfinite(gsl_vector_get(x, i)) || std::abs(gsl_vector_get(x, i) - ctx.center[i]) > ctx.half_width) {
      if (grad) gsl_vector_set_zero(grad);
      return std::numeric_limits<double>::infinity();
    }
  const GpHyperParams h = to_hyper(x, ctx.sigma_floor);
  try {
    const MarginalEvaluation e = joint_evaluate(ctx.charts, h, grad != nullptr, ctx.cache);
    if (grad) {
      gsl_vector_set(grad, 0, -e.gradient[0]);
      gsl_vector_set(grad, 1, -e.gradient[1]);
      gsl_vector_set(grad, 2, -e.gradient[2] * (h.sigma - ctx.sigma_floor) / h.sigma);
    }
    return std::isfinite(e.value) ? -e.value : std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    if (grad) gsl_vector_set_zero(grad);
    return std::numeric_limits<double>::infinity();
  }
}

double gsl_f(const gsl_vector* x, void* p) { return negated(x, *static_cast<SearchContext*>(p), nullptr); }
void gsl_df(const gsl_vector* x, void* p, gsl_vector* g) { negated(x, *static_cast<SearchContext*>(p), g); }
void gsl_fdf(const gsl_vector* x, void* p, double* f, gsl_vector* g) {
  *f = negated(x, *static_cast<SearchContext*>(p), g);
}

struct GslVector {
  gsl_vector* v;
  explicit GslVector(std::size_t n) : v(gsl_vector_alloc(n)) {}
  ~GslVector() { gsl_vector_free(v); }
  GslVector(const GslVector&) = delete;
  GslVector& operator=(const GslVector&) = delete;
};

struct Candidate {
  std::array<double, 3> x;
  double f;
};

Candidate run_bfgs(SearchContext& ctx, const std::array<double, 3>& start, const FitOptions& options) {
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, 3, &ctx};
  GslVector x0(3);
  for (std::size_t i = 0; i < 3; ++i) gsl_vector_set(x0.v, i, start[i]);
  Candidate best{start, gsl_f(x0.v, &ctx)};
  if (!std::isfinite(best.f)) return best;

  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, 3);
  gsl_multimin_fdfminimizer_set(s, &fn, x0.v, 0.1, 0.1);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const int status = gsl_multimin_fdfminimizer_iterate(s);
    if (std::isfinite(s->f) && s->f < best.f) {
      best.f = s->f;
      for (std::size_t i = 0; i < 3; ++i) best.x[i] = gsl_vector_get(s->x, i);
    }
    if (status != GSL_SUCCESS) break;
    const double tol = options.gradient_tol * std::max(1.0, std::abs(s->f));
    if (gsl_multimin_test_gradient(s->gradient, tol) == GSL_SUCCESS) break;
  }
  gsl_multimin_fdfminimizer_free(s);
  return best;
}

Candidate run_simplex(SearchContext& ctx, const std::array<double, 3>& start, const FitOptions& options) {
  gsl_multimin_function fn{&gsl_f, 3, &ctx};
  GslVector x0(3), step(3);
  for (std::size_t i = 0; i < 3; ++i) {
    gsl_vector_set(x0.v, i, start[i]);
    gsl_vector_set(step.v, i, 0.5);
  }
  Candidate best{start, gsl_f(x0.v, &ctx)};
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(s, &fn, x0.v, step.v);
  for (std::size_t it = 0; it < 4 * options.max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (std::isfinite(s->fval) && s->fval < best.f) {
      best.f = s->fval;
      for (std::size_t i = 0; i < 3; ++i) best.x[i] = gsl_vector_get(s->x, i);
    }
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-8) == GSL_SUCCESS) break;
  }
  gsl_multimin_fminimizer_free(s);
  return best;
}

}  // namespace

FitReport fit_hyperparams_report(std::span<const ChartRegression> charts, const GpHyperParams& init,
                                 const FitOptions& options) {
  init.validate();
  if (charts.empty()) throw InputError("fit_hyperparams needs at least one chart");
  gsl_set_error_handler_off();

  const double sigma0 = std::max(init.sigma, 2.0 * options.sigma_floor);
  const std::array<double, 3> origin{std::log(init.A), std::log(init.rho), std::log(sigma0 - options.sigma_floor)};
  const std::vector<ChartCache> cache = build_cache(charts);
  SearchContext ctx{charts, &cache, options.sigma_floor, origin, std::log(options.search_span)};

  std::vector<std::array<double, 3>> starts{origin};
  if (options.multi_start) {
    for (std::size_t i = 0; i < 3; ++i)
      for (double scale : {0.1, 10.0}) {
        auto s = origin;
        // sigma offsets are applied to sigma itself, not to sigma - floor.
        if (i == 2)
          s[2] = std::log(std::max(sigma0 * scale - options.sigma_floor, options.sigma_floor));
        else
          s[i] += std::log(scale);
        starts.push_back(s);
      }
  }

  FitReport report;
  try {
    report.initial_objective = joint_evaluate(charts, init, false, &cache).value;
  } catch (const NumericalError&) {
    report.initial_objective = -std::numeric_limits<double>::infinity();
  }

  double response_scale = 0.0, predictor_scale = 0.0;
  for (const auto& c : charts) {
    if (c.size() == 0) continue;
    response_scale = std::max(response_scale, c.responses.size() ? c.responses.cwiseAbs().maxCoeff() : 0.0);
    predictor_scale = std::max(predictor_scale, c.predictors.size() ? c.predictors.cwiseAbs().maxCoeff() : 0.0);
  }
  if (response_scale <= 1e-12 * predictor_scale) {
    warn("all chart responses vanish; GP hyperparameters kept at their starting values");
    report.hyper = init;
    report.objective = report.initial_objective;
    report.flat_responses = true;
    return report;
  }
  report.starts = starts.size();

  Candidate best{origin, std::numeric_limits<double>::infinity()};
  for (const auto& start : starts) {
    Candidate c = run_bfgs(ctx, start, options);
    if (!std::isfinite(c.f)) {
      c = run_simplex(ctx, start, options);
      report.used_simplex = true;
    }
    if (c.f < best.f) best = c;
  }
  if (!std::isfinite(best.f)) throw NumericalError("hyperparameter optimization failed from every start");

  GslVector xb(3);
  for (std::size_t i = 0; i < 3; ++i) gsl_vector_set(xb.v, i, best.x[i]);
  report.hyper = to_hyper(xb.v, options.sigma_floor);
  report.objective = -best.f;
  if (!(report.objective >= report.initial_objective)) {
    report.hyper = init;
    report.objective = report.initial_objective;
  }
  report.evaluations = ctx.evaluations;
  return report;
}

GpHyperParams fit_hyperparams(std::span<const ChartRegression> charts, const GpHyperParams& init,
                              const FitOptions& options) {
  return fit_hyperparams_report(charts, init, options).hyper;
}

}  // namespace mrgap
