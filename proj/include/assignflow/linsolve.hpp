#pragma once

// Integrators for the linear tangent ODE V' = a + A V, V(0) = 0.

#include "assignflow/linearflow.hpp"
#include "assignflow/rkmk.hpp"
#include "assignflow/trace.hpp"

#include <functional>
#include <optional>

namespace assignflow {

/// V' = a + A V on R^n, with A available only through its action.
struct AffineSystem {
  Vector offset;
  std::function<void(const Vector &, Vector &)> apply;
  /// Spectral norm of A, or any upper bound of it.
  double norm = 0.0;

  Index dim() const noexcept { return offset.size(); }
  Vector operator()(const Vector &x) const {
    Vector y(x.size());
    apply(x, y);
    return y;
  }
};

/// Flattened (a, A) of a linear-flow operator. The system refers to `op`.
AffineSystem affine_system(const LinearFlowOperator &op);
/// Dense system; the norm is taken from an SVD.
AffineSystem dense_system(Matrix a_matrix, Vector offset);

// -- Taylor-type RK schemes --------------------------------------------------

/// One step of the order-q explicit RK scheme (q in 1..4) on the linear ODE:
/// V + h sum_{i<q} (hA)^i/(i+1)! (a + A V), evaluated in Horner form with q
/// applications of A.
Vector rk_tangent_step(int q, const AffineSystem &sys, const Vector &v, double h);

/// Gamma(1+q, t) = (sum_{i=0}^q q!/i! t^i) e^{-t}.
double incomplete_gamma_int(int q, double t);

struct ErrorBoundInputs {
  int q = 1;
  double h = 0.0;
  double norm_A = 0.0;
  double norm_a = 0.0;
  double norm_V = 0.0;
};

/// Local error bound of the order-q scheme on the linear ODE. The tight form
/// is e^{h|A|}(1 - Gamma(1+q, h|A|)/q!)(|a|/|A| + |V|); the loose form replaces
/// the Gamma factor by (1 - e^{-h|A|})^{1+q}.
double local_error_bound(const ErrorBoundInputs &inp, bool tight = true);

/// Largest h with local_error_bound(tight) <= tau, to relative resolution
/// 1e-3, capped at h_max (default 1e3 / |A|). inp.h is ignored.
double select_step(const ErrorBoundInputs &inp, double tau, std::optional<double> h_max = {});

/// Multiplier applied to the power-iteration norm before it enters the bound.
inline constexpr double kNormSafety = 1.01;

struct AdaptiveStep {
  Vector v;
  double h = 0.0;
  double bound = 0.0;
};

/// select_step + rk_tangent_step with absolute tolerance tau_abs.
AdaptiveStep adaptive_rk_step(int q, const AffineSystem &sys, const Vector &v, double tau_abs,
                              std::optional<double> h_max = {});

/// Adaptive RK on the linear flow of `op`. `tau` is per-node: the flattened
/// local error is held below tau * sqrt(|I|).
FlowTrace integrate_linear_adaptive(const LinearFlowOperator &op, int q, double tau,
                                    const Termination &term = {},
                                    const StateObserver &observer = {});

// -- Krylov exponential integrator -------------------------------------------

struct KrylovBasis {
  /// n x m, orthonormal columns; v_1 = a / |a|.
  Matrix basis;
  /// m x m upper Hessenberg, V^T A V.
  Matrix hessenberg;
  double beta = 0.0;
  /// True when the iteration stopped early on an invariant subspace.
  bool exact = false;

  Index dim() const noexcept { return basis.cols(); }
};

/// Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.
KrylovBasis arnoldi(const std::function<void(const Vector &, Vector &)> &apply, const Vector &a,
                    Index m);
KrylovBasis arnoldi(const AffineSystem &sys, Index m);

/// phi_1(t H) e_1, read off the last column of expm([[tH, e_1], [0, 0]]).
Vector phi1_times_e1(const Matrix &h, double t);

/// V(T) = T phi_1(T A) a ~ T |a| V_m phi_1(T H_m) e_1.
Vector exponential_integrator(const AffineSystem &sys, double horizon, Index m);

struct ExponentialResult {
  TangentField v;
  AssignmentState state;
  Index krylov_dim = 0;
};
ExponentialResult exponential_integrator(const LinearFlowOperator &op, double horizon, Index m);

// -- implicit Euler on the linear ODE ----------------------------------------

struct LinearImplicitStep {
  Vector v;
  std::size_t inner_iterations = 0;
  double residual = 0.0;
};

/// Solves V = V_prev + h (a + A V) by fixed-point iteration from V_prev; the
/// residual is d_I over rows of length `labels`. Requires h |A| < 1.
LinearImplicitStep implicit_euler_linear_step(const AffineSystem &sys, const Vector &v_prev,
                                              double h, Index labels,
                                              const ImplicitOptions &options = {});

struct LinearImplicitOptions {
  double h = 0.5;
  ImplicitOptions inner;
  Termination term;
  /// Applied when set; v_max must be filled in (see integrate_linear_relinearized).
  std::optional<RelinearizationControl> relinearization;
};

/// Implicit Euler on the linear flow starting at V = 0 on `op`. The step is
/// capped at 0.5 / |A| so the inner iteration contracts. With relinearization
/// the operator is rebuilt whenever the control triggers.
FlowTrace integrate_linear_implicit(const LinearFlowOperator &op,
                                    const LinearImplicitOptions &options,
                                    const StateObserver &observer = {});

/// Pilot run at W0 = init without updates to obtain v_max, then (for c > 1)
/// a second run with relinearization control c. trace.linearizations counts
/// operators built in the reported run.
FlowTrace integrate_linear_relinearized(const AssignmentState &init, const LabelingGraph &g,
                                        double c, LinearImplicitOptions options,
                                        const StateObserver &observer = {});

} // namespace assignflow
