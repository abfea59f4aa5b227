#include "assignflow/geometry.hpp"

#include "row_ops.hpp"

#include <cmath>
#include <string>

namespace assignflow {
namespace {

void require_same_size(const Vector &a, const Vector &b, const char *what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

void require_same_shape(const RowMatrix &a, const RowMatrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch");
  }
}

bool rows_on_simplex(const RowMatrix &w, double tol) {
  for (Index i = 0; i < w.rows(); ++i) {
    if (!(w.row(i).minCoeff() > 0.0) || std::abs(w.row(i).sum() - 1.0) > tol) {
      return false;
    }
  }
  return true;
}

} // namespace

AssignmentState::AssignmentState(RowMatrix values) : values_(std::move(values)) {
  if (values_.cols() < 1 || !values_.allFinite() || !rows_on_simplex(values_, kSimplexTolerance)) {
    throw InvalidArgument("AssignmentState: rows must be strictly positive and sum to one");
  }
}

AssignmentState AssignmentState::trusted(RowMatrix values) noexcept {
  AssignmentState s;
  s.values_ = std::move(values);
  return s;
}

AssignmentState AssignmentState::barycenter(Index nodes, Index labels) {
  if (nodes < 0 || labels < 1) {
    throw InvalidArgument("AssignmentState::barycenter: invalid dimensions");
  }
  return trusted(RowMatrix::Constant(nodes, labels, 1.0 / static_cast<double>(labels)));
}

TangentField::TangentField(RowMatrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    throw InvalidArgument("TangentField: non-finite entries");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    const double scale = std::max(1.0, values_.row(i).cwiseAbs().sum());
    if (std::abs(values_.row(i).sum()) > kSimplexTolerance * scale) {
      throw InvalidArgument("TangentField: row " + std::to_string(i) + " does not sum to zero");
    }
  }
}

TangentField TangentField::trusted(RowMatrix values) noexcept {
  TangentField f;
  f.values_ = std::move(values);
  return f;
}

TangentField TangentField::zero(Index nodes, Index labels) {
  return trusted(RowMatrix::Zero(nodes, labels));
}

TangentField TangentField::from_flat(const Vector &flat, Index nodes, Index labels) {
  if (flat.size() != nodes * labels) {
    throw InvalidArgument("TangentField::from_flat: length does not match nodes * labels");
  }
  return trusted(Eigen::Map<const RowMatrix>(flat.data(), nodes, labels));
}

Vector TangentField::flat() const {
  return Eigen::Map<const Vector>(values_.data(), values_.size());
}

Vector barycenter(Index labels) {
  return Vector::Constant(labels, 1.0 / static_cast<double>(labels));
}

bool is_simplex_point(const Vector &p, double tol) {
  return p.size() > 0 && p.allFinite() && p.minCoeff() > 0.0 && std::abs(p.sum() - 1.0) <= tol;
}

bool is_tangent_vector(const Vector &v, double tol) {
  return v.allFinite() && std::abs(v.sum()) <= tol;
}

Vector project_t0(const Vector &z) {
  if (!z.allFinite()) {
    throw InvalidArgument("project_t0: non-finite input");
  }
  Vector out(z.size());
  detail::project_t0_into(z, out);
  return out;
}

Vector pi_p(const Vector &p, const Vector &z) {
  require_same_size(p, z, "pi_p");
  Vector out(z.size());
  detail::pi_p_into(p, z, out);
  return out;
}

Vector exp_map(const Vector &p, const Vector &z) {
  require_same_size(p, z, "exp_map");
  Vector out(z.size());
  detail::exp_map_into(p, z, out);
  return out;
}

Vector exp_map_inv(const Vector &p, const Vector &q) {
  require_same_size(p, q, "exp_map_inv");
  return project_t0(Vector((q.array() / p.array()).log()));
}

Vector big_exp(const Vector &p, const Vector &v) {
  require_same_size(p, v, "big_exp");
  return exp_map(p, Vector(v.array() / p.array()));
}

Vector big_exp_inv(const Vector &p, const Vector &q) {
  require_same_size(p, q, "big_exp_inv");
  return pi_p(p, Vector((q.array() / p.array()).log()));
}

Vector geometric_mean(const Vector &base, std::span<const Vector> points,
                      std::span<const double> weights) {
  if (points.size() != weights.size() || points.empty()) {
    throw InvalidArgument("geometric_mean: need one positive weight per point");
  }
  double total = 0.0;
  Vector log_mean = Vector::Zero(base.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    require_same_size(base, points[k], "geometric_mean");
    if (!(weights[k] > 0.0)) {
      throw InvalidArgument("geometric_mean: weights must be positive");
    }
    total += weights[k];
    log_mean += weights[k] * points[k].array().log().matrix();
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw InvalidArgument("geometric_mean: weights must sum to one");
  }
  return exp_map(base, Vector(log_mean - base.array().log().matrix()));
}

TangentField project_t0(const RowMatrix &z) {
  if (!z.allFinite()) {
    throw InvalidArgument("project_t0: non-finite input");
  }
  RowMatrix out(z.rows(), z.cols());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < z.rows(); ++i) {
    detail::project_t0_into(z.row(i), out.row(i));
  }
  return TangentField::trusted(std::move(out));
}

TangentField pi_w(const AssignmentState &w, const RowMatrix &z) {
  require_same_shape(w.values(), z, "pi_w");
  RowMatrix out(z.rows(), z.cols());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < z.rows(); ++i) {
    detail::pi_p_into(w.row(i), z.row(i), out.row(i));
  }
  return TangentField::trusted(std::move(out));
}

AssignmentState exp_map(const AssignmentState &w, const RowMatrix &z) {
  require_same_shape(w.values(), z, "exp_map");
  RowMatrix out(z.rows(), z.cols());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < z.rows(); ++i) {
    detail::exp_map_into(w.row(i), z.row(i), out.row(i));
  }
  return AssignmentState::trusted(std::move(out));
}

TangentField exp_map_inv(const AssignmentState &w, const AssignmentState &q) {
  require_same_shape(w.values(), q.values(), "exp_map_inv");
  RowMatrix out(w.nodes(), w.labels());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < w.nodes(); ++i) {
    detail::project_t0_into((q.row(i).array() / w.row(i).array()).log().matrix(), out.row(i));
  }
  return TangentField::trusted(std::move(out));
}

AssignmentState big_exp(const AssignmentState &w, const TangentField &v) {
  require_same_shape(w.values(), v.values(), "big_exp");
  RowMatrix out(w.nodes(), w.labels());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < w.nodes(); ++i) {
    detail::exp_map_into(w.row(i), (v.row(i).array() / w.row(i).array()).matrix(), out.row(i));
  }
  return AssignmentState::trusted(std::move(out));
}

TangentField big_exp_inv(const AssignmentState &w, const AssignmentState &q) {
  require_same_shape(w.values(), q.values(), "big_exp_inv");
  RowMatrix out(w.nodes(), w.labels());
  ASSIGNFLOW_PARALLEL_ROWS
  for (Index i = 0; i < w.nodes(); ++i) {
    detail::pi_p_into(w.row(i), (q.row(i).array() / w.row(i).array()).log().matrix(),
                      out.row(i));
  }
  return TangentField::trusted(std::move(out));
}

double d_inf(const RowMatrix &a, const RowMatrix &b) {
  require_same_shape(a, b, "d_inf");
  if (a.size() == 0) {
    return 0.0;
  }
  return (a - b).rowwise().norm().maxCoeff() / static_cast<double>(a.cols());
}

double max_row_norm(const RowMatrix &v) {
  return v.size() == 0 ? 0.0 : v.rowwise().norm().maxCoeff();
}

} // namespace assignflow
