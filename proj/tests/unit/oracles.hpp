#pragma once

#include "mrgap/gp.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

// Independent dense GP formulas: explicit inverses and determinants through LU,
// kernel entries summed coordinate by coordinate.
namespace testing {

inline double naive_kernel(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const mrgap::GpHyperParams& h) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += (u(i) - v(i)) * (u(i) - v(i));
  return h.A * std::exp(-s / h.rho);
}

/// Joint Gram of training rows followed by test rows, noise on the training block.
inline Eigen::MatrixXd joint_gram(const Eigen::MatrixXd& w, const Eigen::MatrixXd& u, const mrgap::GpHyperParams& h) {
  const Eigen::Index n = w.rows(), m = u.rows(), t = n + m;
  Eigen::MatrixXd all(t, w.cols());
  all << w, u;
  Eigen::MatrixXd g(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) g(i, j) = naive_kernel(all.row(i).transpose(), all.row(j).transpose(), h);
  for (Eigen::Index i = 0; i < n; ++i) g(i, i) += h.sigma * h.sigma;
  return g;
}

struct DenseConditional {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd covariance;
};

inline DenseConditional condition_dense(const Eigen::MatrixXd& w, const Eigen::MatrixXd& z, const Eigen::MatrixXd& u,
                                        const mrgap::GpHyperParams& h) {
  const Eigen::Index n = w.rows(), m = u.rows();
  const Eigen::MatrixXd g = joint_gram(w, u, h);
  const Eigen::MatrixXd inv = g.topLeftCorner(n, n).fullPivLu().inverse();
  const Eigen::MatrixXd s3 = g.bottomLeftCorner(m, n);
  return {s3 * inv * z, g.bottomRightCorner(m, m) - s3 * inv * g.topRightCorner(n, m)};
}

inline double log_marginal_dense(const Eigen::MatrixXd& w, const Eigen::MatrixXd& z, const mrgap::GpHyperParams& h) {
  const Eigen::Index n = w.rows();
  const Eigen::MatrixXd k = joint_gram(w, Eigen::MatrixXd(0, w.cols()), h);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const double q = static_cast<double>(z.cols());
  return -(z.transpose() * lu.inverse() * z).trace() - q * std::log(lu.determinant()) -
         0.5 * q * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

/// Central differences of the log marginal in (log A, log rho, log sigma).
inline mrgap::LogGradient fd_gradient(const Eigen::MatrixXd& w, const Eigen::MatrixXd& z, const mrgap::GpHyperParams& h,
                                      double step = 1e-5) {
  mrgap::LogGradient g{};
  for (int i = 0; i < 3; ++i) {
    mrgap::GpHyperParams hp = h, hm = h;
    double* p = i == 0 ? &hp.A : i == 1 ? &hp.rho : &hp.sigma;
    double* m = i == 0 ? &hm.A : i == 1 ? &hm.rho : &hm.sigma;
    *p *= std::exp(step);
    *m *= std::exp(-step);
    g[static_cast<std::size_t>(i)] = (log_marginal_dense(w, z, hp) - log_marginal_dense(w, z, hm)) / (2.0 * step);
  }
  return g;
}

inline double relative_error(const mrgap::LogGradient& a, const mrgap::LogGradient& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace testing
