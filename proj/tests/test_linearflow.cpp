#include "assignflow/linearflow.hpp"

#include "assignflow/harness.hpp"
#include "assignflow/linsolve.hpp"
#include "assignflow/rkmk.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace assignflow;

namespace {

double max_abs(const RowMatrix &m) { return m.cwiseAbs().maxCoeff(); }

RowMatrix shifted(const AssignmentState &w, const TangentField &v, double eps) {
  return w.values() + eps * v.values();
}

} // namespace

TEST_CASE("similarity Jacobian against central differences") {
  std::mt19937_64 rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const LabelingGraph g = testing::random_graph(rng, 6, 4, 3, testing::uniform(rng, 0.3, 2.0));
    const AssignmentState w0 = testing::random_state(rng, 6, 4, 1.0);
    const TangentField v = testing::random_tangent(rng, 6, 4);
    const SimilarityJacobian jac(w0, g);
    const double eps = 1e-6;
    const RowMatrix plus = similarity(AssignmentState::trusted(shifted(w0, v, eps)), g).values();
    const RowMatrix minus = similarity(AssignmentState::trusted(shifted(w0, v, -eps)), g).values();
    const RowMatrix fd = (plus - minus) / (2 * eps);
    const RowMatrix exact = jac.apply(v.values());
    worst = std::max(worst, (fd - exact).norm() / exact.norm());
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("Jacobian block structure") {
  std::mt19937_64 rng(42);
  const LabelingGraph g = testing::random_graph(rng, 7, 3, 2);
  const AssignmentState w0 = testing::random_state(rng, 7, 3);
  const SimilarityJacobian jac(w0, g);
  const Matrix dense = jac.dense();
  for (Index i = 0; i < 7; ++i) {
    for (Index k = 0; k < 7; ++k) {
      const Matrix b = jac.block(i, k);
      if (!g.adjacent(i, k)) {
        CHECK(b.cwiseAbs().maxCoeff() == 0.0);
      } else {
        CHECK(b.colwise().sum().cwiseAbs().maxCoeff() < 1e-13);
      }
    }
  }
  // Block action and entry formula agree; transpose agrees with the dense transpose.
  const TangentField v = testing::random_tangent(rng, 7, 3);
  const Vector flat = v.flat();
  const Vector by_entries = dense * flat;
  const RowMatrix by_action = jac.apply(v.values());
  CHECK((Eigen::Map<const Vector>(by_action.data(), by_action.size()) - by_entries)
            .cwiseAbs()
            .maxCoeff() < 1e-13);
  const RowMatrix u = testing::random_tangent(rng, 7, 3).values();
  const Vector uf = Eigen::Map<const Vector>(u.data(), u.size());
  const RowMatrix t = jac.apply_transpose(u);
  CHECK((Eigen::Map<const Vector>(t.data(), t.size()) - dense.transpose() * uf).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("linear flow operator") {
  std::mt19937_64 rng(43);
  const LabelingGraph g = testing::random_graph(rng, 6, 3, 3);
  const AssignmentState w0 = testing::random_state(rng, 6, 3);
  const LinearFlowOperator op = LinearFlowOperator::build(w0, g);

  CHECK(op.offset().values().rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  const Matrix dense = op.dense();
  const double sigma = Eigen::JacobiSVD<Matrix>(dense).singularValues()(0);
  CHECK(std::abs(op.norm() - sigma) <= 1e-6 * sigma);

  const TangentField v = testing::random_tangent(rng, 6, 3);
  Vector y(op.dim());
  op.apply(v.flat(), y);
  CHECK((y - dense * v.flat()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op.apply(v.values()).rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);

  // Offset is Pi_{W0} s0.
  const RowMatrix s0 = similarity(w0, g).values();
  CHECK(max_abs(op.offset().values() - pi_w(w0, s0).values()) < 1e-15);

  CHECK_THROWS_AS(LinearFlowOperator::build(AssignmentState::barycenter(5, 3), g), InvalidArgument);
}

TEST_CASE("A as the derivative of the nonlinear tangent field") {
  std::mt19937_64 rng(44);
  const LabelingGraph g = testing::random_graph(rng, 8, 4);
  const AssignmentState w0 = testing::random_state(rng, 8, 4);
  const LinearFlowOperator op = LinearFlowOperator::build(w0, g);
  const TangentField v = testing::random_tangent(rng, 8, 4);
  // V' = Pi_{W0} S(Exp_{W0}(V)) is the nonlinear flow in this parametrization.
  auto field = [&](double eps) {
    TangentField ev = v;
    ev.values() *= eps;
    return pi_w(w0, similarity(big_exp(w0, ev), g).values()).values();
  };
  const double eps = 1e-5;
  const RowMatrix fd = (field(eps) - op.offset().values()) / eps;
  const RowMatrix av = op.apply(v.values());
  CHECK((fd - av).norm() / av.norm() <= 1e-4);
  CHECK(max_abs(field(0.0) - op.offset().values()) < 1e-15);
}

TEST_CASE("linear_flow_state") {
  std::mt19937_64 rng(45);
  const LabelingGraph g = testing::random_graph(rng, 5, 3);
  const AssignmentState w0 = testing::random_state(rng, 5, 3);
  const LinearFlowOperator op = LinearFlowOperator::build(w0, g);
  CHECK(max_abs(linear_flow_state(op, TangentField::zero(5, 3)).values() - w0.values()) < 1e-15);

  TangentField big = testing::random_tangent(rng, 5, 3, 50.0);
  const AssignmentState far = linear_flow_state(op, big);
  CHECK(far.values().minCoeff() > 0.0);

  // d/dt Exp_{W0}(V(t)) with V' = a + A V equals Pi_W(s0 + S0 V).
  const TangentField v = testing::random_tangent(rng, 5, 3, 0.5);
  const RowMatrix vdot = op.offset().values() + op.apply(v.values());
  const double eps = 1e-6;
  TangentField vp = v;
  TangentField vm = v;
  vp.values() += eps * vdot;
  vm.values() -= eps * vdot;
  const RowMatrix fd =
      (linear_flow_state(op, vp).values() - linear_flow_state(op, vm).values()) / (2 * eps);
  const AssignmentState w = linear_flow_state(op, v);
  const RowMatrix s0 = op.jacobian().similarity().values();
  const RowMatrix expected = pi_w(w, s0 + op.jacobian().apply(v.values())).values();
  CHECK(max_abs(fd - expected) < 1e-8);
}

TEST_CASE("linear and nonlinear flow agree to first order") {
  std::mt19937_64 rng(46);
  const LabelingGraph g = testing::random_graph(rng, 4, 3, 2, 0.8);
  const AssignmentState w0 = testing::random_state(rng, 4, 3);
  const LinearFlowOperator op = LinearFlowOperator::build(w0, g);
  const Matrix a_dense = op.dense();
  const Vector a = op.offset().flat();
  std::vector<double> ts{0.2, 0.1, 0.05, 0.025};
  std::vector<double> gaps;
  for (double t : ts) {
    const Vector vt = oracles::duhamel(a_dense, a, Vector::Zero(a.size()), t);
    const AssignmentState lin = linear_flow_state(op, TangentField::from_flat(vt, 4, 3));
    AssignmentState nonlin = w0;
    for (int s = 0; s < 200; ++s) {
      nonlin = rkmk_step(tableau("rk4"), nonlin, g, t / 200).state;
    }
    gaps.push_back(max_abs(lin.values() - nonlin.values()));
  }
  // O(t^2) at least. The linearization also reproduces the second derivative
  // at t = 0, so the observed slope is close to 3.
  CHECK(oracles::loglog_slope(ts, gaps) > 2.0 - 0.3);
}

TEST_CASE("relinearization") {
  const auto data = gen_signal1d(3);
  std::mt19937_64 rng(47);
  const LabelingGraph g = testing::random_graph(rng, 10, 3, 2, 0.3);
  const AssignmentState bary = AssignmentState::barycenter(10, 3);
  const LinearFlowOperator op = LinearFlowOperator::build(bary, g);

  const TangentField v = testing::random_tangent(rng, 10, 3, 2.0);
  RelinearizationControl ctrl;
  ctrl.v_max = 1e9;
  CHECK_FALSE(relinearize(op, v, ctrl).has_value());

  ctrl.v_max = 0.5 * max_row_norm(v.values());
  ctrl.c = 1.0;
  const auto moved = relinearize(op, v, ctrl);
  REQUIRE(moved.has_value());
  const AssignmentState before = linear_flow_state(op, v);
  const AssignmentState after = linear_flow_state(moved->op, moved->v);
  CHECK(max_abs(before.values() - after.values()) < 1e-10);
  for (Index i = 0; i < 10; ++i) {
    const bool interior = before.row(i).minCoeff() > ctrl.interior_floor;
    const RowMatrix expected_row = interior ? RowMatrix(before.row(i)) : RowMatrix(bary.row(i));
    CHECK(max_abs(moved->op.base().row(i) - expected_row) < 1e-15);
    if (interior) {
      CHECK(moved->v.row(i).norm() < 1e-12);
    }
  }

  // No eligible rows: nothing to rebuild.
  RelinearizationControl strict = ctrl;
  strict.interior_floor = 0.999;
  CHECK_FALSE(relinearize(op, v, strict).has_value());
  RelinearizationControl invalid;
  invalid.c = 0.5;
  CHECK_THROWS_AS(relinearize(op, v, invalid), InvalidArgument);

  // c = 1: a single linearization, identical to the plain run.
  const LabelingGraph sg = make_graph(data);
  const AssignmentState sb = AssignmentState::barycenter(sg.nodes(), sg.labels());
  const auto single = integrate_linear_relinearized(sb, sg, 1.0, {});
  CHECK(single.linearizations == 1);
  const auto plain = integrate_linear_implicit(LinearFlowOperator::build(sb, sg), {});
  CHECK(single.final_state.values() == plain.final_state.values());
  const auto updated = integrate_linear_relinearized(sb, sg, 20.0, {});
  CHECK(updated.converged);
  CHECK(updated.linearizations >= 1);
}
