#pragma once

// Likelihood, similarity and the assignment-flow vector field on a labeling graph.

#include "assignflow/geometry.hpp"
#include "assignflow/graph.hpp"

namespace assignflow {

/// L_i = W_i e^{-D_i/rho} / <W_i, e^{-D_i/rho}>.
AssignmentState likelihood(const AssignmentState &w, const LabelingGraph &g);

/// S_i = exp_{1_S}(sum_k w_ik (log W_k - D_k/rho)), the geometric mean of the
/// neighborhood likelihoods.
AssignmentState similarity(const AssignmentState &w, const LabelingGraph &g);

/// Pi_W(S(W)).
TangentField vector_field(const AssignmentState &w, const LabelingGraph &g);

/// Pi_T0 S(exp_{W0}(V)); the right-hand side of the tangent-space ODE
/// integrated by the RKMK schemes.
TangentField tangent_rhs(const TangentField &v, const AssignmentState &w0, const LabelingGraph &g);

} // namespace assignflow
