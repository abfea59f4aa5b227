#pragma once

// Runge-Kutta-Munthe-Kaas integration of the assignment flow. Each step solves
// the tangent ODE V' = Pi_T0 S(exp_{W0}(V)), V(0) = 0, with a classical RK
// scheme and maps back with W(h) = exp_{W0}(V); the base point is then reset.

#include "assignflow/flow.hpp"
#include "assignflow/tableau.hpp"
#include "assignflow/trace.hpp"

#include <functional>
#include <optional>

namespace assignflow {

/// Right-hand side f(V; W0) of the tangent ODE. The time argument of the
/// general (non-autonomous) formulation is dropped: the flow is autonomous.
using TangentRhs = std::function<TangentField(const TangentField &, const AssignmentState &)>;

TangentRhs graph_rhs(const LabelingGraph &g);

struct RkmkStepResult {
  AssignmentState state;
  TangentField update;
  std::optional<TangentField> embedded_update;
};

/// One explicit RKMK step of size h from w0. Also returns V_hat when the
/// tableau carries secondary weights; both use the same stage evaluations.
RkmkStepResult rkmk_step(const ButcherTableau &tableau, const AssignmentState &w0,
                         const TangentRhs &rhs, double h);
RkmkStepResult rkmk_step(const ButcherTableau &tableau, const AssignmentState &w0,
                         const LabelingGraph &g, double h);

struct ImplicitOptions {
  double tolerance = 1e-8;
  std::size_t max_inner = 10000;
};

struct ImplicitStepResult {
  AssignmentState state;
  TangentField update;
  std::size_t inner_iterations = 0;
  /// d_I between the last two fixed-point iterates.
  double residual = 0.0;
};

/// Geometric implicit Euler: solves V = h f(exp_{W0}(V)) by fixed-point
/// iteration started from `warm_start` (zero if absent). Throws
/// ConvergenceFailure after options.max_inner iterations.
ImplicitStepResult implicit_euler_step(const AssignmentState &w0, const TangentRhs &rhs, double h,
                                       const ImplicitOptions &options = {},
                                       const TangentField *warm_start = nullptr);
ImplicitStepResult implicit_euler_step(const AssignmentState &w0, const LabelingGraph &g, double h,
                                       const ImplicitOptions &options = {},
                                       const TangentField *warm_start = nullptr);

/// Embedded step-size control parameters.
struct StepControl {
  double tau = 0.01;
  int n_tau = 20;
  double grow_factor = 1.25;
  double shrink_factor = 0.5;
  double h0 = 0.01;
  double h_min = 1e-12;

  void validate() const;
};

/// Fixed step size; `be` dispatches to the implicit scheme.
FlowTrace integrate_fixed(const ButcherTableau &tableau, const AssignmentState &init,
                          const LabelingGraph &g, double h, const Termination &term = {},
                          const StateObserver &observer = {},
                          const ImplicitOptions &implicit = {});

/// Embedded pair with the grow / keep / halve rule. Throws StiffnessFailure if
/// the step falls below control.h_min.
FlowTrace integrate_adaptive(const ButcherTableau &tableau, const AssignmentState &init,
                             const LabelingGraph &g, const StepControl &control,
                             const Termination &term = {}, const StateObserver &observer = {});

} // namespace assignflow
