#include "helpers.hpp"
#include "mrgap/gp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace mrgap;

namespace {

GpHyperParams random_hyper(Rng& rng) {
  std::uniform_real_distribution<double> l(-1.0, 1.0);
  return {std::exp(l(rng)), std::exp(l(rng)), 0.05 + 0.3 * std::exp(l(rng))};
}

ChartRegression chart_of(Matrix w, Matrix z) {
  ChartRegression c;
  c.predictors = std::move(w);
  c.responses = std::move(z);
  return c;
}

// 1-d predictors on [-1.5, 1.5] with responses drawn from the GP prior plus noise.
std::vector<ChartRegression> simulate_charts(std::size_t charts, std::size_t per_chart, const GpHyperParams& h,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ChartRegression> out;
  for (std::size_t c = 0; c < charts; ++c) {
    Matrix w(static_cast<Eigen::Index>(per_chart), 1);
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, 0) = unif(rng);
    Matrix k = gram(w, h);
    k.diagonal().array() += h.sigma * h.sigma;
    const Matrix l = Eigen::LLT<Matrix>(k).matrixL();
    Vector e(w.rows());
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = g(rng);
    out.push_back(chart_of(w, l * e));
  }
  return out;
}

}  // namespace

TEST_CASE("kernel values") {
  const GpHyperParams h{2.0, 0.7, 0.1};
  Vector u(2), v(2);
  u << 0.3, -1.0;
  CHECK(kernel(u, u, h) == 2.0);
  v = u;
  v(0) += std::sqrt(h.rho * std::log(2.0));
  CHECK(kernel(u, v, h) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kernel(u, v, h) == kernel(v, u, h));
  CHECK_THROWS_AS(kernel(u, Vector::Zero(3), h), InputError);
}

TEST_CASE("gram examples") {
  const GpHyperParams h{1.5, 0.4, 0.0};
  const Matrix one = gram(Matrix::Constant(1, 2, 0.3), h);
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == 1.5);
  const Matrix two = gram(Matrix::Constant(2, 2, 0.3), h);
  CHECK((two - Matrix::Constant(2, 2, 1.5)).norm() == 0.0);

  Rng rng(1);
  const Matrix p = testing::gaussian_matrix(rng, 50, 2);
  const Matrix g = gram(p, h);
  CHECK((g - g.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS((GpHyperParams{0.0, 1.0, 0.1}.validate()), InputError);
  CHECK_THROWS_AS((GpHyperParams{1.0, -1.0, 0.1}.validate()), InputError);
  CHECK_THROWS_AS((GpHyperParams{1.0, 1.0, -0.1}.validate()), InputError);
  CHECK_NOTHROW((GpHyperParams{1.0, 1.0, 0.0}.validate()));
}

TEST_CASE("predictive with no data is the prior") {
  const GpHyperParams h{1.2, 0.5, 0.1};
  const Matrix u = (Matrix(2, 1) << 0.0, 0.3).finished();
  const PredictiveGaussian p = predictive(Matrix(0, 1), Matrix(0, 2), u, h);
  CHECK(p.mean.rows() == 2);
  CHECK(p.mean.cols() == 2);
  CHECK(p.mean.norm() == 0.0);
  CHECK((p.covariance - gram(u, h)).norm() == 0.0);
}

TEST_CASE("noise-free predictive interpolates") {
  const GpHyperParams h{1.0, 0.5, 0.0};
  const Matrix w = (Matrix(3, 1) << -0.5, 0.1, 0.9).finished();
  const Matrix z = (Matrix(3, 2) << 1.0, -1.0, 0.5, 2.0, -0.3, 0.0).finished();
  const Matrix mean = predictive_mean(w, z, w.row(1), h);
  CHECK((mean - z.row(1)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("predictive matches dense conditioning") {
  Rng rng(2);
  std::uniform_int_distribution<int> size(1, 6);
  for (int t = 0; t < 100; ++t) {
    const int n = size(rng), m = size(rng), d = 1 + t % 3, q = 1 + t % 2;
    const Matrix w = testing::gaussian_matrix(rng, n, d);
    const Matrix z = testing::gaussian_matrix(rng, n, q);
    const Matrix u = testing::gaussian_matrix(rng, m, d);
    const GpHyperParams h = random_hyper(rng);
    const PredictiveGaussian got = predictive(w, z, u, h);
    const testing::DenseConditional want = testing::condition_dense(w, z, u, h);
    CHECK((got.mean - want.mean).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((got.covariance - want.covariance).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((predictive_mean(w, z, u, h) - got.mean).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(got.covariance.diagonal().minCoeff() >= 0.0);
    CHECK(got.covariance.diagonal().maxCoeff() <= h.A + 1e-8);
  }
}

TEST_CASE("adding a training point never increases predictive variance") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const Matrix w = testing::gaussian_matrix(rng, 6, 2);
    const Matrix z = testing::gaussian_matrix(rng, 6, 1);
    const Matrix u = testing::gaussian_matrix(rng, 3, 2);
    const GpHyperParams h = random_hyper(rng);
    const Vector before = predictive(w.topRows(5), z.topRows(5), u, h).covariance.diagonal();
    const Vector after = predictive(w, z, u, h).covariance.diagonal();
    CHECK((after - before).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("log marginal closed form for one point") {
  const GpHyperParams h{1.3, 0.8, 0.2};
  const Matrix w = Matrix::Constant(1, 1, 0.4);
  const Matrix z = Matrix::Constant(1, 1, 0.7);
  const double s = h.A + h.sigma * h.sigma;
  const double want = -0.49 / s - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(log_marginal(w, z, h) == doctest::Approx(want).epsilon(1e-14));
  CHECK(log_marginal(w, 2.0 * z, h) < log_marginal(w, z, h));
  CHECK_THROWS_AS(log_marginal(Matrix(0, 1), Matrix(0, 1), h), InputError);
  CHECK_THROWS_AS(log_marginal(w, Matrix::Zero(2, 1), h), InputError);
}

TEST_CASE("log marginal matches the dense determinant oracle") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const int n = 1 + t % 8, q = 1 + t % 3;
    const Matrix w = testing::gaussian_matrix(rng, n, 2);
    const Matrix z = testing::gaussian_matrix(rng, n, q);
    const GpHyperParams h = random_hyper(rng);
    CHECK(std::abs(log_marginal(w, z, h) - testing::log_marginal_dense(w, z, h)) <= 1e-8);
  }
}

TEST_CASE("log marginal is invariant under row permutation") {
  Rng rng(5);
  const Matrix w = testing::gaussian_matrix(rng, 7, 2);
  const Matrix z = testing::gaussian_matrix(rng, 7, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
  perm.indices() << 3, 0, 6, 1, 5, 2, 4;
  const GpHyperParams h{0.9, 1.1, 0.3};
  CHECK(log_marginal(perm * w, perm * z, h) == doctest::Approx(log_marginal(w, z, h)).epsilon(1e-13));
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const int n = 4 + t % 6, q = 1 + t % 2;
    const Matrix w = testing::gaussian_matrix(rng, n, 1 + t % 2);
    const Matrix z = testing::gaussian_matrix(rng, n, q);
    const GpHyperParams h = random_hyper(rng);
    CHECK(testing::relative_error(log_marginal_gradient(w, z, h), testing::fd_gradient(w, z, h)) <= 1e-4);
  }
}

TEST_CASE("two-output likelihood decomposes into single outputs") {
  Rng rng(7);
  const Matrix w = testing::gaussian_matrix(rng, 8, 2);
  const Matrix z = testing::gaussian_matrix(rng, 8, 2);
  const GpHyperParams h{0.7, 0.9, 0.25};
  const LogGradient both = log_marginal_gradient(w, z, h);
  const LogGradient a = log_marginal_gradient(w, z.col(0), h);
  const LogGradient b = log_marginal_gradient(w, z.col(1), h);
  for (std::size_t i = 0; i < 3; ++i) CHECK(both[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-10));
  CHECK(log_marginal(w, z, h) ==
        doctest::Approx(log_marginal(w, z.col(0), h) + log_marginal(w, z.col(1), h)).epsilon(1e-12));
}

TEST_CASE("joint log marginal sums charts") {
  Rng rng(8);
  std::vector<ChartRegression> charts;
  for (int k = 0; k < 5; ++k)
    charts.push_back(chart_of(testing::gaussian_matrix(rng, 3 + k, 1), testing::gaussian_matrix(rng, 3 + k, 2)));
  const GpHyperParams h{1.0, 0.6, 0.2};
  double direct = 0.0;
  for (const auto& c : charts) direct += testing::log_marginal_dense(c.predictors, c.responses, h);
  CHECK(std::abs(joint_log_marginal(charts, h) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));

  const std::vector<ChartRegression> single{charts[0]};
  CHECK(joint_log_marginal(single, h) == log_marginal(charts[0].predictors, charts[0].responses, h));
  const std::vector<ChartRegression> twice{charts[0], charts[0]};
  CHECK(joint_log_marginal(twice, h) == 2.0 * joint_log_marginal(single, h));

  std::vector<ChartRegression> with_empty = single;
  with_empty.push_back(chart_of(Matrix(0, 1), Matrix(0, 2)));
  CHECK(joint_log_marginal(with_empty, h) == joint_log_marginal(single, h));
  CHECK_THROWS_AS(joint_log_marginal(std::vector<ChartRegression>{}, h), InputError);
}

TEST_CASE("coincident predictors are handled by jitter") {
  const GpHyperParams h{1.0, 0.5, 0.0};
  const Matrix w = Matrix::Zero(4, 1);
  const NoisyGramFactor f(w, h);
  CHECK(f.jitter() > 0.0);
  CHECK(f.jitter() <= 1e-6);
  CHECK(std::isfinite(log_marginal(w, Matrix::Ones(4, 1), h)));
}

TEST_CASE("fit recovers the noise level of simulated data") {
  const GpHyperParams truth{1.0, 0.5, 0.1};
  const auto charts = simulate_charts(20, 10, truth, 9);
  const FitReport r = fit_hyperparams_report(charts, {0.5, 1.0, 0.3});
  CHECK(r.objective >= r.initial_objective);
  CHECK(r.starts == 7);
  CHECK(r.hyper.sigma >= truth.sigma / 1.5);
  CHECK(r.hyper.sigma <= truth.sigma * 1.5);

  const MarginalEvaluation at = joint_log_marginal_with_gradient(charts, r.hyper);
  const double norm = std::sqrt(at.gradient[0] * at.gradient[0] + at.gradient[1] * at.gradient[1] +
                                at.gradient[2] * at.gradient[2]);
  CHECK(norm <= 1e-5);

  const FitReport again = fit_hyperparams_report(charts, r.hyper);
  CHECK(std::abs(again.objective - r.objective) <= 1e-8);
}

TEST_CASE("fit is deterministic and never worse than init") {
  const auto charts = simulate_charts(6, 8, {0.3, 0.2, 0.05}, 10);
  const GpHyperParams init{2.0, 3.0, 0.5};
  const FitReport a = fit_hyperparams_report(charts, init);
  const FitReport b = fit_hyperparams_report(charts, init);
  CHECK(a.hyper == b.hyper);
  CHECK(a.objective >= joint_log_marginal(charts, init));
  FitOptions single;
  single.multi_start = false;
  CHECK(fit_hyperparams_report(charts, init, single).starts == 1);
}

TEST_CASE("vanishing responses keep the starting hyperparameters") {
  ChartRegression c = chart_of((Matrix(3, 1) << -0.5, 0.0, 0.5).finished(), Matrix::Constant(3, 2, 1e-17));
  const std::vector<ChartRegression> charts{c, c};
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  const GpHyperParams init{1e-3, 0.4, 1e-4};
  const FitReport r = fit_hyperparams_report(charts, init);
  set_warning_sink(nullptr);
  CHECK(r.flat_responses);
  CHECK(r.hyper == init);
  CHECK(r.objective == joint_log_marginal(charts, init));
  CHECK(warnings.size() == 1);
}
