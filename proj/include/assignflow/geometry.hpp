#pragma once

// Maps on the open probability simplex S and on the assignment manifold
// W = S x ... x S. Single-point maps take plain vectors; the field versions
// act row by row on |I| x |J| matrices.

#include "assignflow/types.hpp"

#include <span>

namespace assignflow {

inline constexpr double kSimplexTolerance = 1e-12;

/// Row-stochastic, strictly positive |I| x |J| matrix.
class AssignmentState {
public:
  AssignmentState() = default;
  /// Validates positivity and unit row sums.
  explicit AssignmentState(RowMatrix values);

  /// Skips validation; for values produced by the simplex maps themselves.
  static AssignmentState trusted(RowMatrix values) noexcept;
  static AssignmentState barycenter(Index nodes, Index labels);

  Index nodes() const noexcept { return values_.rows(); }
  Index labels() const noexcept { return values_.cols(); }
  const RowMatrix &values() const noexcept { return values_; }
  auto row(Index i) const { return values_.row(i); }

private:
  RowMatrix values_;
};

/// |I| x |J| matrix with zero-sum rows (an element of the product tangent space).
class TangentField {
public:
  TangentField() = default;
  /// Validates the zero row sums (tolerance relative to the row magnitude).
  explicit TangentField(RowMatrix values);

  static TangentField trusted(RowMatrix values) noexcept;
  static TangentField zero(Index nodes, Index labels);
  /// Reshapes a flattened (row-major) vector of length nodes * labels.
  static TangentField from_flat(const Vector &flat, Index nodes, Index labels);

  Index nodes() const noexcept { return values_.rows(); }
  Index labels() const noexcept { return values_.cols(); }
  const RowMatrix &values() const noexcept { return values_; }
  RowMatrix &values() noexcept { return values_; }
  auto row(Index i) const { return values_.row(i); }

  Vector flat() const;
  double norm() const { return values_.norm(); }

private:
  RowMatrix values_;
};

Vector barycenter(Index labels);
bool is_simplex_point(const Vector &p, double tol = kSimplexTolerance);
bool is_tangent_vector(const Vector &v, double tol = kSimplexTolerance);

// -- single simplex --------------------------------------------------------

/// z - mean(z) 1.
Vector project_t0(const Vector &z);
/// (Diag(p) - p p^T) z.
Vector pi_p(const Vector &p, const Vector &z);
/// p e^z / <p, e^z>; independent of constant shifts of z.
Vector exp_map(const Vector &p, const Vector &z);
/// Pi_T0 log(q / p).
Vector exp_map_inv(const Vector &p, const Vector &q);
/// e-geodesic exponential p e^{v/p} / <p, e^{v/p}>.
Vector big_exp(const Vector &p, const Vector &v);
/// Pi_p log(q / p).
Vector big_exp_inv(const Vector &p, const Vector &q);

/// Weighted geometric mean of `points` seen from `base`:
/// exp_base(log(prod_k points_k^{w_k} / base)). Weights must sum to one.
Vector geometric_mean(const Vector &base, std::span<const Vector> points,
                      std::span<const double> weights);

// -- row-wise extensions ---------------------------------------------------

TangentField project_t0(const RowMatrix &z);
TangentField pi_w(const AssignmentState &w, const RowMatrix &z);
AssignmentState exp_map(const AssignmentState &w, const RowMatrix &z);
TangentField exp_map_inv(const AssignmentState &w, const AssignmentState &q);
AssignmentState big_exp(const AssignmentState &w, const TangentField &v);
TangentField big_exp_inv(const AssignmentState &w, const AssignmentState &q);

/// (1/|J|) max_i ||a_i - b_i||, the distance used for all inner-loop and
/// embedded-pair tolerances.
double d_inf(const RowMatrix &a, const RowMatrix &b);

/// max_i ||v_i||_2.
double max_row_norm(const RowMatrix &v);

} // namespace assignflow
