#include "assignflow/linsolve.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace assignflow {

Vector phi1_times_e1(const Matrix &h, double t) {
  const Index m = h.rows();
  if (m < 1 || h.cols() != m) {
    throw InvalidArgument("phi1_times_e1: need a nonempty square matrix");
  }
  Matrix extended = Matrix::Zero(m + 1, m + 1);
  extended.topLeftCorner(m, m) = t * h;
  extended(0, m) = 1.0;
  const Matrix e = extended.exp();
  Vector out = e.col(m).head(m);
  if (!out.allFinite()) {
    throw OverflowFailure("phi1_times_e1: matrix exponential overflowed; reduce the horizon T");
  }
  return out;
}

Vector exponential_integrator(const AffineSystem &sys, double horizon, Index m) {
  if (!(horizon > 0.0) || m < 1) {
    throw InvalidArgument("exponential_integrator: need T > 0 and m >= 1");
  }
  if (sys.offset.norm() == 0.0) {
    return Vector::Zero(sys.dim());
  }
  const KrylovBasis kb = arnoldi(sys, m);
  Vector v = (horizon * kb.beta) * (kb.basis * phi1_times_e1(kb.hessenberg, horizon));
  if (!v.allFinite()) {
    throw OverflowFailure("exponential_integrator: non-finite result; reduce the horizon T");
  }
  return v;
}

ExponentialResult exponential_integrator(const LinearFlowOperator &op, double horizon, Index m) {
  if (!(horizon > 0.0) || m < 1) {
    throw InvalidArgument("exponential_integrator: need T > 0 and m >= 1");
  }
  const AffineSystem sys = affine_system(op);
  Index dim = 0;
  Vector flat;
  if (sys.offset.norm() == 0.0) {
    flat = Vector::Zero(sys.dim());
  } else {
    const KrylovBasis kb = arnoldi(sys, m);
    dim = kb.dim();
    flat = (horizon * kb.beta) * (kb.basis * phi1_times_e1(kb.hessenberg, horizon));
    if (!flat.allFinite()) {
      throw OverflowFailure("exponential_integrator: non-finite result; reduce the horizon T");
    }
  }
  TangentField v = TangentField::from_flat(flat, op.nodes(), op.labels());
  AssignmentState w = linear_flow_state(op, v);
  return {std::move(v), std::move(w), dim};
}

LinearImplicitStep implicit_euler_linear_step(const AffineSystem &sys, const Vector &v_prev,
                                              double h, Index labels,
                                              const ImplicitOptions &options) {
  if (!(h > 0.0) || labels < 1 || sys.dim() % labels != 0 || v_prev.size() != sys.dim()) {
    throw InvalidArgument("implicit_euler_linear_step: invalid arguments");
  }
  const Index nodes = sys.dim() / labels;
  const Vector base = v_prev + h * sys.offset;
  Vector v = v_prev;
  Vector av(v.size());
  double residual = 0.0;
  for (std::size_t it = 1; it <= options.max_inner; ++it) {
    sys.apply(v, av);
    Vector next = base + h * av;
    const Vector diff = next - v;
    residual = Eigen::Map<const RowMatrix>(diff.data(), nodes, labels).rowwise().norm().maxCoeff() /
               static_cast<double>(labels);
    v = std::move(next);
    if (residual <= options.tolerance) {
      return {std::move(v), it, residual};
    }
  }
  throw ConvergenceFailure("implicit_euler_linear_step: fixed-point iteration did not converge",
                           residual);
}

FlowTrace integrate_linear_implicit(const LinearFlowOperator &op,
                                    const LinearImplicitOptions &options,
                                    const StateObserver &observer) {
  if (!(options.h > 0.0)) {
    throw InvalidArgument("integrate_linear_implicit: step size must be positive");
  }
  if (options.relinearization) {
    options.relinearization->validate();
  }
  std::optional<LinearFlowOperator> current;
  const LinearFlowOperator *active = &op;
  FlowTrace trace;
  trace.linearizations = 1;
  Vector v = Vector::Zero(op.dim());
  AssignmentState w = op.base();
  double t = 0.0;
  double entropy = entropy_avg(w);
  if (observer) {
    observer(t, w);
  }
  while (entropy >= options.term.entropy_threshold && trace.steps.size() < options.term.max_steps) {
    const AffineSystem sys = affine_system(*active);
    const double h = active->norm() > 0.0 ? std::min(options.h, 0.5 / active->norm()) : options.h;
    auto step = implicit_euler_linear_step(sys, v, h, active->labels(), options.inner);
    trace.inner_iterations += step.inner_iterations;
    v = std::move(step.v);
    t += h;
    TangentField field = TangentField::from_flat(v, active->nodes(), active->labels());
    w = linear_flow_state(*active, field);
    entropy = entropy_avg(w);
    trace.steps.push_back({trace.steps.size(), t, h, entropy, step.residual});
    if (observer) {
      observer(t, w);
    }
    if (options.relinearization && entropy >= options.term.entropy_threshold) {
      if (auto updated = relinearize(*active, field, *options.relinearization)) {
        v = updated->v.flat();
        current.emplace(std::move(updated->op));
        active = &*current;
        ++trace.linearizations;
      }
    }
  }
  trace.converged = entropy < options.term.entropy_threshold;
  trace.final_time = t;
  trace.final_state = std::move(w);
  trace.final_tangent = TangentField::from_flat(v, active->nodes(), active->labels());
  return trace;
}

FlowTrace integrate_linear_relinearized(const AssignmentState &init, const LabelingGraph &g,
                                        double c, LinearImplicitOptions options,
                                        const StateObserver &observer) {
  if (!(c >= 1.0)) {
    throw InvalidArgument("integrate_linear_relinearized: c must be at least 1");
  }
  const LinearFlowOperator op = LinearFlowOperator::build(init, g);
  options.relinearization.reset();
  // A threshold of v_max itself is never exceeded along the pilot trajectory,
  // so c = 1 reproduces the pilot run.
  if (c == 1.0) {
    return integrate_linear_implicit(op, options, observer);
  }
  const FlowTrace pilot = integrate_linear_implicit(op, options);
  RelinearizationControl ctrl;
  ctrl.c = c;
  ctrl.v_max = max_row_norm(pilot.final_tangent->values());
  options.relinearization = ctrl;
  return integrate_linear_implicit(op, options, observer);
}

} // namespace assignflow
