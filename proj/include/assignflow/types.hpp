#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace assignflow {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Dense |I| x |J| storage; row i holds node i, so a flattened field is row-major.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An inner fixed-point loop did not reach its tolerance.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string &what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Adaptive step size collapsed below the admissible minimum.
class StiffnessFailure : public std::runtime_error {
public:
  StiffnessFailure(const std::string &what, double step)
      : std::runtime_error(what), step_(step) {}
  double step() const noexcept { return step_; }

private:
  double step_;
};

class OverflowFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace assignflow
