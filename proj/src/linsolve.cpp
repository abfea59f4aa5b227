#include "assignflow/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace assignflow {

AffineSystem affine_system(const LinearFlowOperator &op) {
  return AffineSystem{op.offset().flat(),
                      [&op](const Vector &x, Vector &y) { op.apply(x, y); }, op.norm()};
}

AffineSystem dense_system(Matrix a_matrix, Vector offset) {
  if (a_matrix.rows() != a_matrix.cols() || a_matrix.rows() != offset.size()) {
    throw InvalidArgument("dense_system: dimension mismatch");
  }
  const double norm = a_matrix.size() == 0
                          ? 0.0
                          : Eigen::JacobiSVD<Matrix>(a_matrix).singularValues()(0);
  return AffineSystem{std::move(offset),
                      [m = std::move(a_matrix)](const Vector &x, Vector &y) { y.noalias() = m * x; },
                      norm};
}

Vector rk_tangent_step(int q, const AffineSystem &sys, const Vector &v, double h) {
  if (q < 1 || q > 4) {
    throw InvalidArgument("rk_tangent_step: order must be in 1..4");
  }
  if (v.size() != sys.dim()) {
    throw InvalidArgument("rk_tangent_step: dimension mismatch");
  }
  Vector tmp(v.size());
  sys.apply(v, tmp);
  const Vector slope = sys.offset + tmp;
  Vector acc = slope;
  for (int i = q; i >= 2; --i) {
    sys.apply(acc, tmp);
    acc = slope + (h / static_cast<double>(i)) * tmp;
  }
  return v + h * acc;
}

double incomplete_gamma_int(int q, double t) {
  if (q < 0 || !(t >= 0.0)) {
    throw InvalidArgument("incomplete_gamma_int: need q >= 0 and t >= 0");
  }
  // Horner form of t^q + q t^{q-1} + q(q-1) t^{q-2} + ... + q!.
  double sum = 1.0;
  for (int i = q; i >= 1; --i) {
    sum = 1.0 + sum * t / static_cast<double>(i);
  }
  double factorial = 1.0;
  for (int i = 2; i <= q; ++i) {
    factorial *= i;
  }
  return factorial * sum * std::exp(-t);
}

namespace {

/// sum_{i>q} x^i / i! = e^x (1 - Gamma(1+q, x)/q!), without cancellation for small x.
double taylor_tail(int q, double x) {
  if (x == 0.0) {
    return 0.0;
  }
  if (x > 30.0) {
    double partial = 1.0;
    double term = 1.0;
    for (int i = 1; i <= q; ++i) {
      term *= x / i;
      partial += term;
    }
    return std::exp(x) - partial;
  }
  double term = 1.0;
  for (int i = 1; i <= q + 1; ++i) {
    term *= x / i;
  }
  double sum = 0.0;
  for (int i = q + 1; i < q + 400; ++i) {
    sum += term;
    if (term <= sum * std::numeric_limits<double>::epsilon()) {
      break;
    }
    term *= x / (i + 1);
  }
  return sum;
}

void check_inputs(const ErrorBoundInputs &inp) {
  if (inp.q < 1 || inp.q > 4 || !(inp.h >= 0.0) || !(inp.norm_A >= 0.0) ||
      !(inp.norm_a >= 0.0) || !(inp.norm_V >= 0.0)) {
    throw InvalidArgument("local_error_bound: inputs out of range");
  }
}

} // namespace

double local_error_bound(const ErrorBoundInputs &inp, bool tight) {
  check_inputs(inp);
  if (inp.h == 0.0 || inp.norm_A == 0.0) {
    return 0.0;
  }
  const double x = inp.h * inp.norm_A;
  const double factor =
      tight ? taylor_tail(inp.q, x) : std::exp(x) * std::pow(-std::expm1(-x), inp.q + 1);
  return factor * (inp.norm_a / inp.norm_A + inp.norm_V);
}

double select_step(const ErrorBoundInputs &inp, double tau, std::optional<double> h_max) {
  if (!(tau > 0.0)) {
    throw InvalidArgument("select_step: tolerance must be positive");
  }
  ErrorBoundInputs probe = inp;
  probe.h = 0.0;
  check_inputs(probe);
  if (probe.norm_A == 0.0) {
    return h_max.value_or(std::numeric_limits<double>::infinity());
  }
  const double cap = h_max.value_or(1e3 / probe.norm_A);
  auto bound = [&](double h) {
    probe.h = h;
    return local_error_bound(probe, true);
  };
  if (bound(cap) <= tau) {
    return cap;
  }
  double hi = cap;
  double lo = cap;
  do {
    hi = lo;
    lo *= 0.5;
    if (lo < std::numeric_limits<double>::min()) {
      return 0.0;
    }
  } while (bound(lo) > tau);
  while (hi > lo * (1.0 + 1e-3)) {
    const double mid = std::sqrt(lo * hi);
    (bound(mid) <= tau ? lo : hi) = mid;
  }
  return lo;
}

AdaptiveStep adaptive_rk_step(int q, const AffineSystem &sys, const Vector &v, double tau_abs,
                              std::optional<double> h_max) {
  ErrorBoundInputs inp{q, 0.0, kNormSafety * sys.norm, sys.offset.norm(), v.norm()};
  const double h = select_step(inp, tau_abs, h_max);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw StiffnessFailure("adaptive_rk_step: no admissible step size", h);
  }
  inp.h = h;
  return {rk_tangent_step(q, sys, v, h), h, local_error_bound(inp, true)};
}

FlowTrace integrate_linear_adaptive(const LinearFlowOperator &op, int q, double tau,
                                    const Termination &term, const StateObserver &observer) {
  if (!(tau > 0.0)) {
    throw InvalidArgument("integrate_linear_adaptive: tolerance must be positive");
  }
  const AffineSystem sys = affine_system(op);
  const double tau_abs = tau * std::sqrt(static_cast<double>(op.nodes()));
  FlowTrace trace;
  trace.linearizations = 1;
  Vector v = Vector::Zero(op.dim());
  AssignmentState w = op.base();
  double t = 0.0;
  double entropy = entropy_avg(w);
  if (observer) {
    observer(t, w);
  }
  while (entropy >= term.entropy_threshold && trace.steps.size() < term.max_steps) {
    auto step = adaptive_rk_step(q, sys, v, tau_abs);
    v = std::move(step.v);
    t += step.h;
    trace.rhs_evaluations += static_cast<std::size_t>(q);
    w = linear_flow_state(op, TangentField::from_flat(v, op.nodes(), op.labels()));
    entropy = entropy_avg(w);
    trace.steps.push_back({trace.steps.size(), t, step.h, entropy, step.bound});
    if (observer) {
      observer(t, w);
    }
  }
  trace.converged = entropy < term.entropy_threshold;
  trace.final_time = t;
  trace.final_state = std::move(w);
  trace.final_tangent = TangentField::from_flat(v, op.nodes(), op.labels());
  return trace;
}

KrylovBasis arnoldi(const std::function<void(const Vector &, Vector &)> &apply, const Vector &a,
                    Index m) {
  if (m < 1) {
    throw InvalidArgument("arnoldi: dimension must be at least 1");
  }
  const double beta = a.norm();
  if (!(beta > 0.0)) {
    throw InvalidArgument("arnoldi: starting vector is zero");
  }
  const Index n = a.size();
  m = std::min(m, n);
  Matrix basis(n, m);
  Matrix hess = Matrix::Zero(m, m);
  basis.col(0) = a / beta;
  Vector w(n);
  Index dim = m;
  bool exact = false;
  for (Index j = 0; j < m; ++j) {
    apply(basis.col(j), w);
    const double scale = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i <= j; ++i) {
        const double coeff = basis.col(i).dot(w);
        hess(i, j) += coeff;
        w -= coeff * basis.col(i);
      }
    }
    if (j + 1 == m) {
      break;
    }
    const double next = w.norm();
    if (next < 1e-12 * std::max(1.0, scale)) {
      dim = j + 1;
      exact = true;
      break;
    }
    hess(j + 1, j) = next;
    basis.col(j + 1) = w / next;
  }
  return KrylovBasis{basis.leftCols(dim), hess.topLeftCorner(dim, dim), beta, exact};
}

KrylovBasis arnoldi(const AffineSystem &sys, Index m) { return arnoldi(sys.apply, sys.offset, m); }

} // namespace assignflow
