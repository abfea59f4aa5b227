#pragma once

#include "assignflow/geometry.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace assignflow {

/// Average assignment entropy -(1/(|I||J|)) sum_ij W_ij log W_ij (natural log).
double entropy_avg(const AssignmentState &w);

/// Stopping rule shared by every integrator.
struct Termination {
  double entropy_threshold = 1e-3;
  std::size_t max_steps = 100000;
};

struct TraceStep {
  std::size_t k = 0;
  double t = 0.0;
  double h = 0.0;
  double entropy = 0.0;
  std::optional<double> error_estimate;
};

/// Record of one integration run.
struct FlowTrace {
  std::vector<TraceStep> steps;
  AssignmentState final_state;
  /// Tangent representation of final_state w.r.t. the last base point, where
  /// the integrator has one (linear flows).
  std::optional<TangentField> final_tangent;
  double final_time = 0.0;
  bool converged = false;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t inner_iterations = 0;
  std::size_t linearizations = 0;

  std::size_t iterations() const noexcept { return steps.size(); }
};

/// Called with (t, W(t)) at the initial state and after every accepted step.
using StateObserver = std::function<void(double, const AssignmentState &)>;

} // namespace assignflow
