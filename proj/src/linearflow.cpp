#include "assignflow/linearflow.hpp"

#include "row_ops.hpp"

#include <cmath>
#include <random>

namespace assignflow {

SimilarityJacobian::SimilarityJacobian(const AssignmentState &w0, const LabelingGraph &g)
    : base_(w0), s0_(assignflow::similarity(w0, g)), graph_(&g) {}

RowMatrix SimilarityJacobian::apply(const RowMatrix &v) const {
  const Index n = base_.nodes();
  const Index labels = base_.labels();
  if (v.rows() != n || v.cols() != labels) {
    throw InvalidArgument("SimilarityJacobian::apply: shape mismatch");
  }
  const RowMatrix scaled = v.cwiseQuotient(base_.values());
  RowMatrix out(n, labels);
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(labels);
    const auto nb = graph_->neighbors(i);
    const auto wt = graph_->weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      z.noalias() += wt[k] * scaled.row(nb[k]);
    }
    detail::pi_p_into(s0_.row(i), z, out.row(i));
  }
  return out;
}

RowMatrix SimilarityJacobian::apply_transpose(const RowMatrix &u) const {
  const Index n = base_.nodes();
  const Index labels = base_.labels();
  if (u.rows() != n || u.cols() != labels) {
    throw InvalidArgument("SimilarityJacobian::apply_transpose: shape mismatch");
  }
  RowMatrix projected(n, labels);
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < n; ++i) {
    detail::pi_p_into(s0_.row(i), u.row(i), projected.row(i));
  }
  RowMatrix out = RowMatrix::Zero(n, labels);
  for (Index i = 0; i < n; ++i) {
    const auto nb = graph_->neighbors(i);
    const auto wt = graph_->weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      out.row(nb[k]) += wt[k] * projected.row(i);
    }
  }
  return out.cwiseQuotient(base_.values());
}

Matrix SimilarityJacobian::block(Index i, Index k) const {
  const Index labels = base_.labels();
  Matrix b = Matrix::Zero(labels, labels);
  const auto nb = graph_->neighbors(i);
  const auto wt = graph_->weights(i);
  for (std::size_t idx = 0; idx < nb.size(); ++idx) {
    if (nb[idx] != k) {
      continue;
    }
    const double w = wt[idx];
    for (Index j = 0; j < labels; ++j) {
      const double sj = s0_.values()(i, j);
      for (Index l = 0; l < labels; ++l) {
        const double sl = s0_.values()(i, l);
        const double wkl = base_.values()(k, l);
        b(j, l) += j == l ? w * (1.0 - sj) * sj / wkl : -w * sj * sl / wkl;
      }
    }
  }
  return b;
}

Matrix SimilarityJacobian::dense() const {
  const Index n = base_.nodes();
  const Index labels = base_.labels();
  Matrix m = Matrix::Zero(n * labels, n * labels);
  for (Index i = 0; i < n; ++i) {
    for (Index k : graph_->neighbors(i)) {
      m.block(i * labels, k * labels, labels, labels) = block(i, k);
    }
  }
  return m;
}

LinearFlowOperator LinearFlowOperator::build(const AssignmentState &w0, const LabelingGraph &g,
                                             const PowerIterationOptions &power) {
  if (w0.nodes() != g.nodes() || w0.labels() != g.labels()) {
    throw InvalidArgument("LinearFlowOperator::build: base point does not match the graph");
  }
  SimilarityJacobian jac(w0, g);
  TangentField offset = pi_w(w0, jac.similarity().values());
  LinearFlowOperator op(std::move(jac), std::move(offset));
  op.norm_ = spectral_norm(op, power);
  return op;
}

RowMatrix LinearFlowOperator::apply(const RowMatrix &v) const {
  return pi_w(base(), jacobian_.apply(v)).values();
}

void LinearFlowOperator::apply(const Vector &x, Vector &y) const {
  const RowMatrix out = apply(RowMatrix(Eigen::Map<const RowMatrix>(x.data(), nodes(), labels())));
  y = Eigen::Map<const Vector>(out.data(), out.size());
}

RowMatrix LinearFlowOperator::apply_transpose(const RowMatrix &y) const {
  // Pi_p is symmetric, so A^T = S0^T Pi_{W0}.
  return jacobian_.apply_transpose(pi_w(base(), y).values());
}

Matrix LinearFlowOperator::dense() const {
  const Index labels = this->labels();
  Matrix s0 = jacobian_.dense();
  for (Index i = 0; i < nodes(); ++i) {
    const Vector p = base().row(i).transpose();
    const Matrix proj = Matrix(p.asDiagonal()) - p * p.transpose();
    s0.middleRows(i * labels, labels) = proj * s0.middleRows(i * labels, labels);
  }
  return s0;
}

double spectral_norm(const LinearFlowOperator &op, const PowerIterationOptions &options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RowMatrix x(op.nodes(), op.labels());
  for (Index i = 0; i < x.size(); ++i) {
    x.data()[i] = uni(rng);
  }
  x /= x.norm();
  double sigma_sq = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const RowMatrix y = op.apply(x);
    const double estimate = y.squaredNorm();
    RowMatrix z = op.apply_transpose(y);
    const double zn = z.norm();
    const bool settled = it > 0 && std::abs(estimate - sigma_sq) <= options.relative_tolerance * estimate;
    sigma_sq = estimate;
    if (zn == 0.0 || settled) {
      break;
    }
    x = z / zn;
  }
  return std::sqrt(sigma_sq);
}

AssignmentState linear_flow_state(const LinearFlowOperator &op, const TangentField &v) {
  return big_exp(op.base(), v);
}

void RelinearizationControl::validate() const {
  if (!(c >= 1.0) || !(v_max >= 0.0) || !(interior_floor >= 0.0 && interior_floor < 1.0)) {
    throw InvalidArgument("RelinearizationControl: parameters out of range");
  }
}

std::optional<Relinearized> relinearize(const LinearFlowOperator &op, const TangentField &v,
                                        const RelinearizationControl &ctrl) {
  ctrl.validate();
  const AssignmentState w = linear_flow_state(op, v);
  const double threshold = ctrl.v_max / ctrl.c;
  RowMatrix base = op.base().values();
  bool triggered = false;
  bool moved = false;
  for (Index i = 0; i < w.nodes(); ++i) {
    triggered = triggered || v.row(i).norm() > threshold;
    if (w.row(i).minCoeff() > ctrl.interior_floor) {
      base.row(i) = w.row(i);
      moved = true;
    }
  }
  if (!triggered || !moved) {
    return std::nullopt;
  }
  AssignmentState new_base = AssignmentState::trusted(std::move(base));
  TangentField new_v = big_exp_inv(new_base, w);
  return Relinearized{LinearFlowOperator::build(new_base, op.graph()), std::move(new_v)};
}

} // namespace assignflow
