#include "assignflow/flow.hpp"

#include "row_ops.hpp"

namespace assignflow {
namespace {

void require_compatible(const AssignmentState &w, const LabelingGraph &g, const char *what) {
  if (w.nodes() != g.nodes() || w.labels() != g.labels()) {
    throw InvalidArgument(std::string(what) + ": state shape does not match the graph");
  }
}

} // namespace

AssignmentState likelihood(const AssignmentState &w, const LabelingGraph &g) {
  require_compatible(w, g, "likelihood");
  return exp_map(w, g.scaled_data());
}

AssignmentState similarity(const AssignmentState &w, const LabelingGraph &g) {
  require_compatible(w, g, "similarity");
  const Index n = w.nodes();
  const Index labels = w.labels();
  // Per-node log W_k - D_k/rho, shared by every neighborhood containing k.
  RowMatrix lifted(n, labels);
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index k = 0; k < n; ++k) {
    lifted.row(k) = w.row(k).array().log().matrix() + g.scaled_data().row(k);
  }
  RowMatrix out(n, labels);
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(labels);
    const auto nb = g.neighbors(i);
    const auto wt = g.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      z.noalias() += wt[k] * lifted.row(nb[k]);
    }
    const double shift = z.maxCoeff();
    out.row(i) = (z.array() - shift).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return AssignmentState::trusted(std::move(out));
}

TangentField vector_field(const AssignmentState &w, const LabelingGraph &g) {
  return pi_w(w, similarity(w, g).values());
}

TangentField tangent_rhs(const TangentField &v, const AssignmentState &w0, const LabelingGraph &g) {
  return project_t0(similarity(exp_map(w0, v.values()), g).values());
}

} // namespace assignflow
