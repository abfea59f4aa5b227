#pragma once

// Linear assignment flow: W(t) = Exp_{W0}(V(t)) with V' = a + A V,
// a = Pi_{W0} s0, A = Pi_{W0} S0, s0 = S(W0), S0 = dS_{W0}.

#include "assignflow/flow.hpp"

#include <cstdint>
#include <optional>

namespace assignflow {

/// dS at a base point W0. Block (i, k) acts as w_ik Pi_{s0_i}(V_k / W0_k) for
/// k in N_i and vanishes otherwise.
class SimilarityJacobian {
public:
  SimilarityJacobian(const AssignmentState &w0, const LabelingGraph &g);
  SimilarityJacobian(const AssignmentState &, LabelingGraph &&) = delete;

  const AssignmentState &base() const noexcept { return base_; }
  /// s0 = S(W0).
  const AssignmentState &similarity() const noexcept { return s0_; }
  const LabelingGraph &graph() const noexcept { return *graph_; }

  /// S0 V through the block action.
  RowMatrix apply(const RowMatrix &v) const;
  /// S0^T U.
  RowMatrix apply_transpose(const RowMatrix &u) const;

  /// Block (i, k) from the explicit entry formula; zero when k is not in N_i.
  Matrix block(Index i, Index k) const;
  /// Fully assembled S0 (entry formula); small instances only.
  Matrix dense() const;

private:
  AssignmentState base_;
  AssignmentState s0_;
  const LabelingGraph *graph_;
};

struct PowerIterationOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-8;
  std::uint64_t seed = 0x5eedULL;
};

/// The pair (a, A) at a linearization point, applied matrix-free. Holds a
/// pointer to the graph, which must outlive the operator.
class LinearFlowOperator {
public:
  static LinearFlowOperator build(const AssignmentState &w0, const LabelingGraph &g,
                                  const PowerIterationOptions &power = {});
  static LinearFlowOperator build(const AssignmentState &, LabelingGraph &&,
                                  const PowerIterationOptions & = {}) = delete;

  const AssignmentState &base() const noexcept { return jacobian_.base(); }
  const SimilarityJacobian &jacobian() const noexcept { return jacobian_; }
  const LabelingGraph &graph() const noexcept { return jacobian_.graph(); }
  Index nodes() const noexcept { return base().nodes(); }
  Index labels() const noexcept { return base().labels(); }
  Index dim() const noexcept { return nodes() * labels(); }

  /// a = Pi_{W0} s0.
  const TangentField &offset() const noexcept { return offset_; }
  /// Spectral norm of A from power iteration on A^T A.
  double norm() const noexcept { return norm_; }

  RowMatrix apply(const RowMatrix &v) const;
  /// Flattened (row-major) form of apply.
  void apply(const Vector &x, Vector &y) const;
  RowMatrix apply_transpose(const RowMatrix &y) const;

  /// Assembled A = Pi_{W0} S0 from the entry formula; small instances only.
  Matrix dense() const;

private:
  LinearFlowOperator(SimilarityJacobian jacobian, TangentField offset)
      : jacobian_(std::move(jacobian)), offset_(std::move(offset)) {}

  SimilarityJacobian jacobian_;
  TangentField offset_;
  double norm_ = 0.0;
};

/// Largest singular value of a matrix-free operator via power iteration on A^T A.
double spectral_norm(const LinearFlowOperator &op, const PowerIterationOptions &options = {});

/// Exp_{W0}(V).
AssignmentState linear_flow_state(const LinearFlowOperator &op, const TangentField &v);

struct RelinearizationControl {
  double c = 1.0;
  /// max_i ||V_i|| at termination of the pilot run at the barycenter.
  double v_max = 0.0;
  double interior_floor = 0.01;

  void validate() const;
};

struct Relinearized {
  LinearFlowOperator op;
  TangentField v;
};

/// Rebuilds the operator when max_i ||V_i|| > v_max / c. Only rows with
/// min_j W_ij > interior_floor move their base point; if there is none the
/// operator is kept. The new V represents the same state:
/// Exp_{W0'}(V') = Exp_{W0}(V).
std::optional<Relinearized> relinearize(const LinearFlowOperator &op, const TangentField &v,
                                        const RelinearizationControl &ctrl);

} // namespace assignflow
