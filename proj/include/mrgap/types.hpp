#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace mrgap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Malformed or inconsistent user input (files, flags, dimensions).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be parsed; the message names the offending row and column.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Failure of a numerical routine (factorization, eigensolver, optimizer).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A local neighborhood holds too few points to define a chart.
class InsufficientNeighborsError : public InputError {
 public:
  InsufficientNeighborsError(std::size_t index, std::size_t count, std::size_t required)
      : InsufficientNeighborsError(index, count,
                                   "point " + std::to_string(index) + " has " + std::to_string(count) +
                                       " points in its covariance ball, needs more than " +
                                       std::to_string(required)) {}
  InsufficientNeighborsError(std::size_t index, std::size_t count, const std::string& message)
      : InputError(message), index_(index), count_(count) {}

  std::size_t index() const noexcept { return index_; }
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t index_;
  std::size_t count_;
};

/// Non-fatal diagnostics go through one sink (stderr by default).
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace mrgap
