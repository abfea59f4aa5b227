#include "assignflow/rkmk.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace assignflow {

double entropy_avg(const AssignmentState &w) {
  const RowMatrix &v = w.values();
  if (v.size() == 0) {
    return 0.0;
  }
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double p = v.data()[i];
    if (p > 0.0) {
      sum -= p * std::log(p);
    }
  }
  return sum / static_cast<double>(v.size());
}

TangentRhs graph_rhs(const LabelingGraph &g) {
  return [&g](const TangentField &v, const AssignmentState &w0) { return tangent_rhs(v, w0, g); };
}

RkmkStepResult rkmk_step(const ButcherTableau &tableau, const AssignmentState &w0,
                         const TangentRhs &rhs, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("rkmk_step: step size must be positive");
  }
  if (!tableau.explicit_scheme()) {
    throw InvalidArgument("rkmk_step: tableau '" + tableau.name + "' is implicit");
  }
  const Index s = tableau.stages();
  std::vector<RowMatrix> stages;
  stages.reserve(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) {
    RowMatrix u = RowMatrix::Zero(w0.nodes(), w0.labels());
    for (Index j = 0; j < i; ++j) {
      if (tableau.a(i, j) != 0.0) {
        u += (h * tableau.a(i, j)) * stages[static_cast<std::size_t>(j)];
      }
    }
    stages.push_back(rhs(TangentField::trusted(std::move(u)), w0).values());
  }
  auto combine = [&](const Vector &weights) {
    RowMatrix v = RowMatrix::Zero(w0.nodes(), w0.labels());
    for (Index j = 0; j < s; ++j) {
      if (weights(j) != 0.0) {
        v += (h * weights(j)) * stages[static_cast<std::size_t>(j)];
      }
    }
    return TangentField::trusted(std::move(v));
  };
  RkmkStepResult result{AssignmentState{}, combine(tableau.b), std::nullopt};
  if (tableau.b_hat) {
    result.embedded_update = combine(*tableau.b_hat);
  }
  result.state = exp_map(w0, result.update.values());
  return result;
}

RkmkStepResult rkmk_step(const ButcherTableau &tableau, const AssignmentState &w0,
                         const LabelingGraph &g, double h) {
  return rkmk_step(tableau, w0, graph_rhs(g), h);
}

ImplicitStepResult implicit_euler_step(const AssignmentState &w0, const TangentRhs &rhs, double h,
                                       const ImplicitOptions &options,
                                       const TangentField *warm_start) {
  if (!(h > 0.0)) {
    throw InvalidArgument("implicit_euler_step: step size must be positive");
  }
  TangentField v = warm_start ? *warm_start : TangentField::zero(w0.nodes(), w0.labels());
  double residual = 0.0;
  for (std::size_t it = 1; it <= options.max_inner; ++it) {
    RowMatrix next = h * rhs(v, w0).values();
    residual = d_inf(next, v.values());
    v = TangentField::trusted(std::move(next));
    if (residual <= options.tolerance) {
      return {exp_map(w0, v.values()), std::move(v), it, residual};
    }
  }
  throw ConvergenceFailure("implicit_euler_step: fixed-point iteration did not converge in " +
                               std::to_string(options.max_inner) + " iterations",
                           residual);
}

ImplicitStepResult implicit_euler_step(const AssignmentState &w0, const LabelingGraph &g, double h,
                                       const ImplicitOptions &options,
                                       const TangentField *warm_start) {
  return implicit_euler_step(w0, graph_rhs(g), h, options, warm_start);
}

void StepControl::validate() const {
  if (!(tau > 0.0) || n_tau < 1 || !(h0 > 0.0) || !(grow_factor >= 1.0) ||
      !(shrink_factor > 0.0 && shrink_factor < 1.0) || !(h_min > 0.0)) {
    throw InvalidArgument("StepControl: parameters out of range");
  }
}

namespace {

bool done(const FlowTrace &trace, double entropy, const Termination &term) {
  return entropy < term.entropy_threshold || trace.steps.size() >= term.max_steps;
}

} // namespace

FlowTrace integrate_fixed(const ButcherTableau &tableau, const AssignmentState &init,
                          const LabelingGraph &g, double h, const Termination &term,
                          const StateObserver &observer, const ImplicitOptions &implicit) {
  if (!(h > 0.0)) {
    throw InvalidArgument("integrate_fixed: step size must be positive");
  }
  const bool implicit_scheme = !tableau.explicit_scheme();
  if (implicit_scheme && tableau.name != "be") {
    throw InvalidArgument("integrate_fixed: only the implicit Euler tableau is supported");
  }
  FlowTrace trace;
  std::size_t evaluations = 0;
  const TangentRhs base_rhs = graph_rhs(g);
  const TangentRhs rhs = [&](const TangentField &v, const AssignmentState &w0) {
    ++evaluations;
    return base_rhs(v, w0);
  };

  AssignmentState w = init;
  double t = 0.0;
  double entropy = entropy_avg(w);
  if (observer) {
    observer(t, w);
  }
  std::optional<TangentField> previous;
  while (!done(trace, entropy, term)) {
    if (implicit_scheme) {
      auto step = implicit_euler_step(w, rhs, h, implicit, previous ? &*previous : nullptr);
      trace.inner_iterations += step.inner_iterations;
      w = std::move(step.state);
      previous = std::move(step.update);
    } else {
      w = rkmk_step(tableau, w, rhs, h).state;
    }
    t += h;
    entropy = entropy_avg(w);
    trace.steps.push_back({trace.steps.size(), t, h, entropy, std::nullopt});
    if (observer) {
      observer(t, w);
    }
  }
  trace.converged = entropy < term.entropy_threshold;
  trace.final_time = t;
  trace.final_state = std::move(w);
  trace.rhs_evaluations = evaluations;
  return trace;
}

FlowTrace integrate_adaptive(const ButcherTableau &tableau, const AssignmentState &init,
                             const LabelingGraph &g, const StepControl &control,
                             const Termination &term, const StateObserver &observer) {
  control.validate();
  if (!tableau.embedded() || !tableau.explicit_scheme()) {
    throw InvalidArgument("integrate_adaptive: tableau '" + tableau.name +
                          "' is not an explicit embedded pair");
  }
  FlowTrace trace;
  std::size_t evaluations = 0;
  const TangentRhs base_rhs = graph_rhs(g);
  const TangentRhs rhs = [&](const TangentField &v, const AssignmentState &w0) {
    ++evaluations;
    return base_rhs(v, w0);
  };

  AssignmentState w = init;
  double t = 0.0;
  double h = control.h0;
  double entropy = entropy_avg(w);
  if (observer) {
    observer(t, w);
  }
  const double grow_below = control.tau / static_cast<double>(control.n_tau);
  while (!done(trace, entropy, term)) {
    auto step = rkmk_step(tableau, w, rhs, h);
    const double estimate = d_inf(step.update.values(), step.embedded_update->values());
    if (estimate >= control.tau) {
      ++trace.rejected_steps;
      h *= control.shrink_factor;
      if (h < control.h_min) {
        throw StiffnessFailure("integrate_adaptive: step size underflow", h);
      }
      continue;
    }
    w = std::move(step.state);
    t += h;
    entropy = entropy_avg(w);
    trace.steps.push_back({trace.steps.size(), t, h, entropy, estimate});
    if (observer) {
      observer(t, w);
    }
    if (estimate < grow_below) {
      h *= control.grow_factor;
    }
  }
  trace.converged = entropy < term.entropy_threshold;
  trace.final_time = t;
  trace.final_state = std::move(w);
  trace.rhs_evaluations = evaluations;
  return trace;
}

} // namespace assignflow
